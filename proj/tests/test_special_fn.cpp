#include <doctest.h>

#include <cmath>

#include "zel/errors.hpp"
#include "zel/special_fn.hpp"

using zel::bessel_i0;
using zel::log_bessel_i0;

TEST_SUITE("special_fn") {
  TEST_CASE("I0 matches the standard library across the series/asymptotic switch") {
    for (double x = 0.0; x <= 600.0; x += (x < 30 ? 0.173 : 7.31)) {
      // The library oracle itself carries relative errors near 4e-15.
      const double ref = std::cyl_bessel_i(0.0, x);
      CHECK(std::abs(bessel_i0(x) / ref - 1.0) < 1e-14);
    }
  }

  TEST_CASE("log I0 reference values") {
    // High-precision values computed independently.
    struct Ref {
      double x, v;
    } refs[] = {{0.0, 0.0},
                {1e-3, 2.4999998437500174652e-7},
                {0.5, 0.061549719185481303941},
                {19.9, 17.492149818621350601},
                {20.1, 17.687083876788981119},
                {50.0, 47.127575501871804584},
                {700.0, 695.80569999844344908},
                {1000.0, 995.62730888986946467},
                {1e5, 99993.324599984316463}};
    for (auto r : refs) {
      const double got = log_bessel_i0(r.x);
      if (r.v == 0.0) {
        CHECK(got == 0.0);
      } else {
        CHECK(std::abs(got / r.v - 1.0) < 1e-15);
      }
    }
  }

  TEST_CASE("I0 is continuous at the switch point") {
    const double a = log_bessel_i0(std::nextafter(20.0, 0.0));
    const double b = log_bessel_i0(20.0);
    CHECK(std::abs(a - b) < 1e-13);
  }

  TEST_CASE("I0 rejects invalid arguments") {
    CHECK_THROWS_AS(bessel_i0(-1.0), zel::DomainError);
    CHECK_THROWS_AS(log_bessel_i0(NAN), zel::DomainError);
    CHECK(std::isinf(bessel_i0(800.0)));
    CHECK(std::isfinite(log_bessel_i0(1e300)));
  }

  TEST_CASE("G and A_m against independent high-precision quadrature") {
    struct Ref {
      double sigma, g, a0, a1;
    } refs[] = {{0.55, 1.994053355975302790, 0.11913790464978219171, 0.70256872942475264160},
                {0.6, 1.576004564656517189, 0.17261858368443147462, 1.7058371591099485744},
                {0.75, 2.471724553739536685, 0.18857640301315515892, 48.275559171367720682},
                {0.8, 3.348175205788446220, 0.16687727713708230070, 521.49149105338218968},
                {0.9, 8.124300841471311400, 0.097339967740851483103, 973399677.40851483103}};
    for (auto r : refs) {
      CHECK(std::abs(zel::g_constant(r.sigma) / r.g - 1.0) < 1e-11);
      CHECK(std::abs(zel::a_constant(0, r.sigma) / r.a0 - 1.0) < 1e-10);
      CHECK(std::abs(zel::a_constant(1, r.sigma) / r.a1 - 1.0) < 1e-10);
    }
  }

  TEST_CASE("G by a crude independent trapezoid in log u") {
    // u = e^v, integrand log I0(e^v) e^{-v/sigma}; two Taylor terms for tiny u,
    // std::cyl_bessel_i up to 500, the leading large-u form beyond.
    const double sigma = 0.7;
    auto log_i0 = [](double u) {
      if (u < 1e-2) return u * u / 4.0 - u * u * u * u / 64.0;  // log(1 + tiny) loses digits
      if (u < 500.0) return std::log(std::cyl_bessel_i(0.0, u));
      return u - 0.5 * std::log(2.0 * M_PI * u) + std::log1p(1.0 / (8.0 * u) + 9.0 / (128.0 * u * u));
    };
    double s = 0.0;
    const double h = 1e-3;
    for (long i = 0; i <= 230000; ++i) {
      const double v = -30.0 + h * static_cast<double>(i);
      s += log_i0(std::exp(v)) * std::exp(-v / sigma);
    }
    s *= h;
    CHECK(std::abs(zel::g_constant(sigma) / s - 1.0) < 1e-6);
  }

  TEST_CASE("G domain") {
    CHECK_THROWS_AS(zel::g_constant(0.5), zel::DomainError);
    CHECK_THROWS_AS(zel::g_constant(1.0), zel::DomainError);
    // G blows up at both ends: like 1/(4(2 - 1/sigma)) near 1/2 and through the tail near 1.
    CHECK(zel::g_constant(0.51) > zel::g_constant(0.6));
    CHECK(zel::g_constant(0.99) > zel::g_constant(0.9));
    CHECK(zel::g_constant(0.501) * 4.0 * (2.0 - 1.0 / 0.501) == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("kappa") {
    CHECK(zel::kappa(0.5) == 0.0);
    CHECK(zel::kappa(0.75) == 0.75);
  }
}
