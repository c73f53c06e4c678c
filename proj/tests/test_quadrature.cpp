#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>

#include "zel/quadrature.hpp"

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre weights sum to the interval length") {
    for (int n : {1, 2, 5, 20, 40}) {
      const auto& r = zel::gauss_legendre(n);
      REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
      CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    }
  }

  TEST_CASE("gauss-legendre is exact for polynomials of degree 2n-1") {
    const auto& r = zel::gauss_legendre(10);
    for (int d = 0; d <= 19; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(s - exact) < 1e-14);
    }
  }

  TEST_CASE("adaptive integration of smooth and peaked integrands") {
    auto q = zel::integrate_adaptive<double>([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-15, 1e-14);
    CHECK(q.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    auto peak = zel::integrate_adaptive<double>([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, 1e-12, 1e-12);
    CHECK(peak.value == doctest::Approx(2.0 * std::atan(1.0 / 1e-2) / 1e-2).epsilon(1e-10));
  }

  TEST_CASE("complex integrand and partitions") {
    using C = std::complex<double>;
    auto q = zel::integrate_adaptive_partition<C>([](double x) { return std::exp(C(0.0, x)); },
                                                  {0.0, 1.0, 2.0, 3.14159265358979323846}, 1e-15, 1e-14);
    CHECK(std::abs(q.value - C(0.0, 2.0)) < 1e-13);
  }
}
