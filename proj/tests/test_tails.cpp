#include <doctest.h>

#include <cmath>
#include <numbers>

#include "zel/errors.hpp"
#include "zel/special_fn.hpp"
#include "zel/tails.hpp"

using namespace zel;

TEST_SUITE("tails") {
  TEST_CASE("exceedance bounds and monotonicity") {
    auto table = sieve(10000);
    PolySpec s{0.8, 0, 0.0, 1000};
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < table.count_upto(1000); ++i) abs_sum += std::pow(double(table.primes()[i]), -0.8);
    auto g = TGrid::covering(1e5, 1000);
    std::vector<double> V{-abs_sum - 1.0, -1.0, 0.0, 0.5, 1.0, 2.0, abs_sum + 1.0};
    auto c = measure_exceedance_poly(s, table, g, V);
    CHECK(c.measure_fraction.front() == 1.0);
    CHECK(c.measure_fraction.back() == 0.0);
    CHECK(c.below_resolution.back());
    for (std::size_t i = 1; i < V.size(); ++i) CHECK(c.measure_fraction[i] <= c.measure_fraction[i - 1]);
    for (std::size_t i = 0; i < V.size(); ++i)
      CHECK(c.exceed_counts[i] == std::llround(c.measure_fraction[i] * static_cast<double>(g.count)));
  }

  TEST_CASE("exceedance counts match a direct count") {
    auto table = sieve(1000);
    PolySpec s{0.5, 1, 0.9, 300};
    auto g = TGrid::covering(2e4, 300);
    auto vals = poly_eval_batch(s, table, g);
    std::vector<double> V{-0.5, 0.0, 0.7};
    auto c = measure_exceedance_poly(s, table, g, V);
    for (std::size_t i = 0; i < V.size(); ++i) {
      std::int64_t n = 0;
      for (double v : vals) n += v > V[i];
      CHECK(c.exceed_counts[i] == n);
    }
  }

  TEST_CASE("multi-theta pass equals separate passes") {
    auto table = sieve(1000);
    PolySpec s{0.6, 0, 0.0, 500};
    auto g = TGrid::covering(3e4, 500);
    std::vector<double> V{0.0, 1.0, 2.0};
    std::vector<double> thetas{0.0, 1.0, 2.5};
    auto multi = measure_exceedance_poly(s, thetas, table, g, V);
    for (std::size_t q = 0; q < thetas.size(); ++q) {
      PolySpec sq = s;
      sq.theta = thetas[q];
      CHECK(measure_exceedance_poly(sq, table, g, V).exceed_counts == multi[q].exceed_counts);
    }
  }

  TEST_CASE("exceedance is refinement stable") {
    auto table = sieve(1000);
    PolySpec s{0.7, 0, 0.0, 1000};
    auto g = TGrid::covering(1e5, 1000);
    std::vector<double> V{0.0, 0.5, 1.0, 1.5, 2.0};
    auto a = measure_exceedance_poly(s, table, g, V);
    auto b = measure_exceedance_poly(s, table, g.refined(), V);
    for (std::size_t i = 0; i < V.size(); ++i)
      CHECK(std::abs(a.measure_fraction[i] - b.measure_fraction[i]) <= 2.0 / g.count + 1e-3);
  }

  TEST_CASE("eta exceedance at sigma = 2 never passes the absolute bound") {
    // |Re eta~_1(2 + it)| <= sum Lambda(n) n^{-2} (log n)^{-2} = eta~_1(2).
    const double bound = eta_tilde(1, 2.0, 0.0).real();
    auto g = TGrid::with_count(100.0, 50);
    auto c = measure_exceedance_eta(1, 2.0, 0.0, g, {0.0, bound});
    CHECK(c.measure_fraction[1] == 0.0);
    CHECK(c.excluded == 0);
    CHECK_THROWS_AS(measure_exceedance_eta(1, 2.0, 0.0, TGrid::with_count(1e6, 200000), {0.0}), DomainError);
  }

  TEST_CASE("eta and lambda-sum exceedance differ by at most the defect shift") {
    auto table = sieve(10000);
    auto g = TGrid::with_count(60.0, 40);
    double max_defect = 0.0;
    std::vector<double> eta_vals, sum_vals;
    for (std::int64_t j = 0; j < g.count; ++j) {
      const cplx e = eta_tilde(1, 0.75, g.at(j));
      const cplx l = lambda_sum(1, 0.75, 10000, g.at(j), table);
      max_defect = std::max(max_defect, std::abs(e - l));
      eta_vals.push_back(e.real());
      sum_vals.push_back(l.real());
    }
    CHECK(std::isfinite(max_defect));
    auto c = measure_exceedance_eta(1, 0.75, 0.0, g, {0.0});
    std::int64_t lo = 0, hi = 0;
    for (double v : sum_vals) {
      lo += v > max_defect;
      hi += v > -max_defect;
    }
    CHECK(c.exceed_counts[0] >= lo);
    CHECK(c.exceed_counts[0] <= hi);
  }

  TEST_CASE("critical saddle") {
    for (int m : {1, 2}) {
      for (double V : {3.0, 20.0, 300.0}) {
        const double X = 1e60;
        const double x = solve_saddle_critical(V, X, m);
        CHECK(x >= 3.0);
        CHECK(std::abs(saddle_rhs_critical(x, X, m) - V) <= 1e-12 * V);
        CHECK(solve_saddle_critical(2.0 * V, X, m) > x);
      }
    }
    CHECK_THROWS_AS(solve_saddle_critical(10.0, 1e3, 1), DomainError);
    CHECK_THROWS_AS(solve_saddle_critical(1e6, 1e30, 2), NoRootError);
  }

  TEST_CASE("strip saddle") {
    for (double sigma : {0.6, 0.75, 0.9}) {
      for (int m : {0, 1}) {
        const double g = g_constant(sigma);
        // The right-hand side has an interior minimum; below it there is no root.
        double floor_v = HUGE_VAL;
        for (double u = std::log(3.0); u < 700.0; u += 0.01)
          floor_v = std::min(floor_v, saddle_rhs_strip(std::exp(u), sigma, m, g));
        if (floor_v > 3.0) CHECK_THROWS_AS(solve_saddle_strip(3.0, sigma, m), NoRootError);
        const double v0 = std::max(3.0, 1.5 * floor_v);
        double prev = 0.0;
        for (double V : {v0, 10.0 * v0, 1000.0 * v0}) {
          const double x = solve_saddle_strip(V, sigma, m);
          CHECK(std::abs(saddle_rhs_strip(x, sigma, m, g) - V) <= 1e-12 * V);
          CHECK(x > prev);
          prev = x;
        }
      }
    }
    CHECK_THROWS_AS(solve_saddle_strip(10.0, 0.5, 0), DomainError);
  }

  TEST_CASE("predicted exponents") {
    TailParams p;
    p.m = 1;
    p.X = 1e300;
    auto a = predict_tail(TailFamily::critical_poly, 10.0, p);
    p.T = 1e10;
    auto b = predict_tail(TailFamily::critical_eta, 10.0, p);
    const double main = 2.0 * 4.0 * 100.0 * std::pow(std::log(10.0), 2);
    CHECK(b.exponent == doctest::Approx(main).epsilon(1e-14));
    CHECK(a.exponent >= b.exponent);
    CHECK(a.exponent == doctest::Approx(main).epsilon(0.05));

    TailParams q;
    q.m = 0;
    q.sigma = 0.75;
    auto c = predict_tail(TailFamily::strip_eta, 100.0, q);
    CHECK(c.exponent == doctest::Approx(0.18857640301315515892 * 1e8 * std::pow(std::log(100.0), 3)).epsilon(1e-10));
    CHECK(c.error_window == doctest::Approx(std::sqrt(1.0 / std::log(100.0))).epsilon(1e-14));
  }

  TEST_CASE("validity flags are advisory") {
    TailParams p;
    p.m = 1;
    p.X = 1e6;
    auto ok = predict_tail(TailFamily::critical_poly, 10.0, p);
    CHECK(ok.valid);
    p.X = 1e3;
    auto bad = predict_tail(TailFamily::critical_poly, 10.0, p);
    CHECK_FALSE(bad.valid);
    CHECK(bad.exponent > 0.0);
    CHECK_THROWS_AS(predict_tail(TailFamily::critical_poly, 10.0, TailParams{}), DomainError);
    CHECK_THROWS_AS(predict_tail(TailFamily::critical_eta, 10.0, TailParams{}), DomainError);
    CHECK_THROWS_AS(predict_tail(TailFamily::strip_eta, 2.0, TailParams{0, 0.75, 0.0, {}, {}}), DomainError);
    CHECK(parse_tail_family("strip_poly") == TailFamily::strip_poly);
    CHECK_THROWS_AS(parse_tail_family("other"), DomainError);
  }

  TEST_CASE("trimmed set") {
    auto table = sieve(1000);
    PolySpec s{0.7, 1, 0.0, 1000};
    auto g = TGrid::covering(2e4, 1000);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < table.count_upto(1000); ++i) {
      const double p = table.primes()[i];
      abs_sum += std::pow(p, -0.7) / std::log(p);
    }
    CHECK(trim_set_A(s, table, g, abs_sum).complement_fraction == 0.0);
    CHECK(trim_set_A(s, table, g, 0.0).complement_fraction == 1.0);
    double prev = 1.0;
    for (double W : {0.2, 0.5, 1.0, 2.0}) {
      auto r = trim_set_A(s, table, g, W);
      CHECK(r.complement_fraction <= prev);
      prev = r.complement_fraction;
    }
    CHECK_THROWS_AS(trim_set_A(PolySpec{0.5, 0, 0.0, 100}, table, g, 1.0), DomainError);
  }
}
