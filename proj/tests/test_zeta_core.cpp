#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "zel/errors.hpp"
#include "zel/zeta_core.hpp"

using zel::cplx;

namespace {

// Dirichlet series with a crude integral tail, valid for Re s > 1.
cplx zeta_direct(cplx s, int n_max) {
  cplx sum(0.0, 0.0);
  for (int n = n_max; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
  sum += std::pow(static_cast<double>(n_max), 1.0 - s) / (s - 1.0) - 0.5 * std::pow(static_cast<double>(n_max), -s);
  return sum;
}

}  // namespace

TEST_SUITE("zeta_core") {
  TEST_CASE("zeta reference values") {
    CHECK(std::abs(zel::zeta({2.0, 0.0}) - std::numbers::pi * std::numbers::pi / 6.0) < 1e-15);
    CHECK(std::abs(zel::zeta({0.25, 0.0}) - (-0.813278405261891656521447820074)) < 1e-14);
    CHECK(std::abs(zel::zeta({3.0, 100.0}) - cplx(1.09579857341499727975923876868, -0.0284642497792269511610317025577)) < 1e-13);
    CHECK(std::abs(zel::zeta({-0.5, 2.0}) - cplx(0.228094971716526329804961136618, -0.144529171733713596419890337627)) < 1e-13);
    // First nontrivial zero.
    CHECK(std::abs(zel::zeta({0.5, 14.134725141734693})) < 1e-14);
  }

  TEST_CASE("zeta agrees with the Dirichlet series for Re s > 1") {
    for (double t : {0.0, 1.0, 7.5, 33.0}) {
      for (double sigma : {1.5, 2.0, 4.0}) {
        const cplx s(sigma, t);
        CHECK(std::abs(zel::zeta(s) - zeta_direct(s, 200000)) < 1e-9);
      }
    }
  }

  TEST_CASE("zeta reflection symmetry") {
    for (double t : {3.0, 21.0, 250.0}) {
      const cplx a = zel::zeta({0.3, t});
      const cplx b = zel::zeta({0.3, -t});
      CHECK(std::abs(a - std::conj(b)) < 1e-13 * std::abs(a));
    }
  }

  TEST_CASE("zeta pole and checked errors") {
    CHECK_THROWS_AS(zel::zeta({1.0, 0.0}), zel::DomainError);
    auto r = zel::zeta_checked({0.5, 100.0});
    CHECK(r.target_met);
    CHECK(r.err_estimate < 1e-12);
  }

  TEST_CASE("branched log zeta against an independent continuation") {
    struct Ref {
      double sigma, t;
      cplx v;
    } refs[] = {{0.5, 10.0, {0.437735148242388893513023481678, -0.07451825729989794676062984847}},
                {0.5, 20.0, {0.137884016859082311383679183506, -1.18689480844448404481275654949}},
                {0.75, 30.0, {-0.556836302939106135975564840937, -1.21258684393800282645683153787}},
                {0.5, 100.0, {0.990543314618062226366444288368, -0.00757093127300894852911438192261}}};
    for (auto r : refs) {
      auto b = zel::log_zeta_branched(r.sigma, r.t);
      CHECK(std::abs(b.value - r.v) < 1e-11);
      CHECK(b.path_origin_sigma == 10.0);
      CHECK(std::abs(std::exp(b.value) - zel::zeta({r.sigma, r.t})) < 1e-12);
    }
  }

  TEST_CASE("branched log tends to 0 for large sigma and exp recovers zeta") {
    auto b = zel::log_zeta_branched(30.0, 5.0);
    CHECK(std::abs(b.value) < 1e-8);
    CHECK(b.unwind_count == 0);
    zel::LogZetaLine line(40.0);
    for (double s : {3.0, 1.2, 0.6, 0.1, -0.5}) {
      auto v = line.at(s);
      CHECK(std::abs(std::exp(v.value) / zel::zeta({s, 40.0}) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("continuation across the critical strip picks up winding") {
    // Imaginary part of log zeta(1/2 + it) equals pi S(t); S(t) stays small but the
    // unwound argument differs from the principal one at large t.
    zel::LogZetaLine line(1000.0);
    auto v = line.at(0.5);
    CHECK(std::abs(v.value.imag()) < 3.0);
    CHECK(std::abs(std::exp(v.value) / zel::zeta({0.5, 1000.0}) - 1.0) < 1e-11);
  }

  TEST_CASE("near-zero on the path is reported") {
    CHECK_THROWS_AS(zel::log_zeta_branched(0.3, 14.134725141734693), zel::NearZeroOnPath);
  }

  TEST_CASE("quadrature config validation") {
    zel::QuadratureConfig cfg;
    cfg.alpha_split = 1.5;
    CHECK_THROWS_AS(zel::validate(cfg), zel::DomainError);
    cfg = {};
    cfg.tail_terms = 8;
    CHECK_THROWS_AS(zel::validate(cfg), zel::DomainError);
  }

  TEST_CASE("eta~ for sigma > 1 equals its Dirichlet series") {
    // sum Lambda(n) n^{-s} (log n)^{-m-1}, summed directly to 2e6 with a tail bound.
    const int n_max = 2'000'000;
    std::vector<double> lam(n_max + 1, 0.0);
    std::vector<int> spf(n_max + 1, 0);
    for (int i = 2; i <= n_max; ++i) {
      if (spf[i]) continue;
      for (long long j = i; j <= n_max; j += i)
        if (!spf[j]) spf[j] = i;
      for (long long q = i; q <= n_max; q *= i) lam[q] = std::log(static_cast<double>(i));
    }
    for (int m : {1, 2, 3}) {
      for (double t : {0.0, 10.0, 55.0}) {
        const cplx s(2.0, t);
        cplx sum(0.0, 0.0);
        for (int n = n_max; n >= 2; --n) {
          if (lam[n] == 0.0) continue;
          const double ln = std::log(static_cast<double>(n));
          sum += lam[n] * std::pow(static_cast<double>(n), -s) / std::pow(ln, m + 1);
        }
        const double tail = 1.0 / (n_max * std::pow(std::log(static_cast<double>(n_max)), m + 1));
        auto r = zel::eta_tilde_detailed(m, 2.0, t);
        CHECK(std::abs(r.value - sum) < tail + 1e-12);
        CHECK(r.tail_bound < 1e-14);
      }
    }
  }

  TEST_CASE("eta~ satisfies d/dsigma eta~_m = -eta~_{m-1}") {
    const double t = 17.0, sigma = 0.8, h = 1e-3;
    for (int m : {2, 3}) {
      const cplx d = (zel::eta_tilde(m, sigma + h, t) - zel::eta_tilde(m, sigma - h, t)) / (2.0 * h);
      CHECK(std::abs(d + zel::eta_tilde(m - 1, sigma, t)) < 1e-6);
    }
    const cplx d1 = (zel::eta_tilde(1, sigma + h, t) - zel::eta_tilde(1, sigma - h, t)) / (2.0 * h);
    CHECK(std::abs(d1 + zel::log_zeta_branched(sigma, t).value) < 1e-6);
  }

  TEST_CASE("b_m constants") {
    // b_1 = (1/pi) int_{1/2}^inf log|zeta(a)| da, computed independently.
    CHECK(std::abs(zel::b_constant(1) - 0.81735276857704056344) < 1e-9);
    // m = 2: i^2 times (real part - i pi/8) has imaginary part pi/8.
    CHECK(std::abs(zel::b_constant(2) - 0.125) < 1e-12);
    CHECK(std::abs(zel::b_constant(3) - (-0.9511680061383442584)) < 1e-9);
  }

  TEST_CASE("c_m(sigma) relation to eta~ for sigma > 1") {
    for (int m : {1, 2, 3}) {
      const cplx c = zel::c_constant(m, 1.5);
      cplx im(1.0, 0.0);
      for (int i = 0; i < m; ++i) im *= cplx(0.0, 1.0);
      CHECK(std::abs(c - im * zel::eta_tilde(m, 1.5, 0.0)) < 1e-10);
    }
  }

  TEST_CASE("S_1 identity with the vertical integral") {
    for (double t : {5.0, 20.0, 31.0}) {
      auto s = zel::s_m_detailed(1, t);
      CHECK(std::abs(std::numbers::pi * s.value - zel::eta_tilde(1, 0.5, t).real()) < 1e-7);
    }
  }

  TEST_CASE("S_0 jumps are located at zero ordinates") {
    auto s = zel::s_m_detailed(2, 26.0);
    REQUIRE(s.jumps.size() == 3);
    CHECK(std::abs(s.jumps[0] - 14.134725141734693) < 1e-8);
    CHECK(std::abs(s.jumps[1] - 21.022039638771555) < 1e-8);
    CHECK(std::abs(s.jumps[2] - 25.010857580145688) < 1e-8);
  }

  TEST_CASE("S_m recursion: S_m(t) - S_m(u) = int_u^t S_{m-1}") {
    // Simpson's rule on a short, jump-free interval; its error is far below 1e-9.
    const double t1 = 30.0, t2 = 30.02;
    const double d = zel::s_m(2, t2) - zel::s_m(2, t1);
    const double simpson =
        (t2 - t1) / 6.0 * (zel::s_m(1, t1) + 4.0 * zel::s_m(1, 0.5 * (t1 + t2)) + zel::s_m(1, t2));
    CHECK(std::abs(d - simpson) < 1e-9);
    CHECK(zel::s_m(1, 0.0) == doctest::Approx(zel::b_constant(1)).epsilon(1e-14));
  }

  TEST_CASE("zeta cache round trip") {
    zel::ZetaCache cache;
    const cplx z = cache.get_or_compute(0.5, 10.0);
    CHECK(cache.size() == 1);
    CHECK(cache.find(0.5, 10.0).value() == z);
    CHECK_FALSE(cache.find(0.5, 10.000000001).has_value());
    const auto path = std::filesystem::temp_directory_path() / "zel_zgrd_test.bin";
    cache.insert(2.0, -3.0, {1.0, 2.0});
    cache.save(path);
    auto back = zel::ZetaCache::load(path);
    CHECK(back.size() == 2);
    CHECK(back.find(2.0, -3.0).value() == cplx(1.0, 2.0));
    CHECK(back.find(0.5, 10.0).value() == z);
    std::filesystem::remove(path);
  }
}
