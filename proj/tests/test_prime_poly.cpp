#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>

#include "zel/errors.hpp"
#include "zel/prime_poly.hpp"

using namespace zel;

namespace {

bool is_prime_trial(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

double naive_poly(const PolySpec& s, double t) {
  double acc = 0.0;
  for (std::uint64_t p = 2; p <= s.X; ++p) {
    if (!is_prime_trial(p)) continue;
    const long double lp = std::log(static_cast<long double>(p));
    acc += std::pow(static_cast<double>(p), -s.sigma) * std::pow(static_cast<double>(lp), -s.m) *
           std::cos(static_cast<double>(std::fmod(static_cast<long double>(t) * lp + s.theta, 2.0L * std::numbers::pi_v<long double>)));
  }
  return acc;
}

}  // namespace

TEST_SUITE("prime_poly") {
  TEST_CASE("small prime tables") {
    auto t = sieve(10);
    CHECK(t.primes() == std::vector<std::uint64_t>{2, 3, 5, 7});
    CHECK(sieve(31).size() == 11);
    CHECK(sieve(1'000'000).size() == 78498);
    CHECK_THROWS_AS(sieve(2), DomainError);
    CHECK_THROWS_AS(sieve(100'000'001), DomainError);
  }

  TEST_CASE("segmented sieve agrees with trial division") {
    for (std::uint64_t X : {3ull, 4ull, 97ull, 1000ull, 262147ull, 600000ull}) {
      auto t = sieve(X);
      std::vector<std::uint64_t> ref;
      for (std::uint64_t n = 2; n <= X; ++n)
        if (is_prime_trial(n)) ref.push_back(n);
      CHECK(t.primes() == ref);
      for (std::size_t i = 1; i < t.logs().size(); ++i) CHECK(t.logs()[i] > t.logs()[i - 1]);
    }
  }

  TEST_CASE("sieve at the upper limit") {
    auto t = sieve(100'000'000);
    CHECK(t.size() == 5761455);
    CHECK(t.primes().back() == 99999989);
  }

  TEST_CASE("prime table cache file") {
    const auto dir = std::filesystem::temp_directory_path() / "zel_ptab_test";
    std::filesystem::remove_all(dir);
    setenv("ZEL_CACHE_DIR", dir.c_str(), 1);
    auto a = PrimeTable::cached(5000);
    CHECK(std::filesystem::exists(dir / "ptab_5000.bin"));
    auto b = PrimeTable::cached(5000);
    CHECK(a.primes() == b.primes());
    unsetenv("ZEL_CACHE_DIR");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("poly_eval basics") {
    auto table = sieve(1000);
    PolySpec s{0.5, 1, 0.0, 31};
    double abs_sum = 0.0;
    for (auto p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31}) abs_sum += std::pow(p, -0.5) / std::log(p);
    CHECK(poly_eval(s, table, 0.0) == doctest::Approx(abs_sum).epsilon(1e-14));
    s.theta = 0.7;
    const double v = poly_eval(s, table, 100.0);
    CHECK(std::abs(v - naive_poly(s, 100.0)) < 1e-12);
    PolySpec s2 = s;
    s2.theta += 2.0 * std::numbers::pi;
    CHECK(std::abs(poly_eval(s2, table, 100.0) - v) < 1e-13);
    s2.theta = s.theta + std::numbers::pi;
    CHECK(std::abs(poly_eval(s2, table, 100.0) + v) < 1e-13);
  }

  TEST_CASE("grid construction") {
    auto g = TGrid::covering(1e6, 31);
    CHECK(g.delta <= max_grid_spacing(31));
    CHECK(std::abs(g.count * g.delta - g.T) <= g.delta);
    CHECK(g.at(g.count - 1) < 2.0 * g.T);
    // Grid points are exact: T + j delta computed two ways agree.
    for (std::int64_t j : {std::int64_t(1), g.count / 3, g.count - 1}) {
      const long double exact = static_cast<long double>(g.T) + static_cast<long double>(j) * g.delta;
      CHECK(static_cast<long double>(g.at(j)) == exact);
    }
    CHECK(TGrid::with_count(1e4, 1).at(0) == 1e4);
  }

  TEST_CASE("batch kernel matches pointwise evaluation") {
    auto table = sieve(100'000);
    PolySpec s{0.6, 1, 1.1, 20'000};
    auto g = TGrid::with_count(1e7, 200'000);
    auto v = poly_eval_batch(s, table, g);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> pick(0, g.count - 1);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      auto j = pick(rng);
      worst = std::max(worst, std::abs(v[j] - poly_eval(s, table, g.at(j))));
    }
    CHECK(worst <= 1e-10);
    auto one = poly_eval_batch(s, table, TGrid::with_count(1e7, 1));
    CHECK(one[0] == doctest::Approx(poly_eval(s, table, 1e7)).epsilon(1e-12));
  }

  TEST_CASE("batch results do not depend on workers or chunking") {
    auto table = sieve(2000);
    PolySpec s{0.5, 2, 0.3, 2000};
    auto g = TGrid::covering(3e4, 2000);
    StreamConfig a, b;
    a.workers = 1;
    b.workers = 3;
    b.chunk_points = 2048;
    CHECK(poly_eval_batch(s, table, g, a) == poly_eval_batch(s, table, g, b));
  }

  TEST_CASE("grid integral is stable under refinement") {
    // A left Riemann sum of cos(omega t) at spacing delta with omega delta <= 2 pi / 3
    // misses the integral by at most 2 |delta / (e^{i omega delta} - 1) - 1 / (i omega)|,
    // which is below 1.1 delta; summed over primes this bounds both grids.
    auto table = sieve(1000);
    PolySpec s{0.5, 1, 0.0, 200};
    auto weights = poly_weights(s, table);
    for (auto g : {TGrid::covering(1e5, 200), TGrid::covering(1e5, 200).refined()}) {
      const double end = g.T + static_cast<double>(g.count) * g.delta;
      double exact = 0.0, wsum = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = table.logs()[i];
        exact += weights[i] * (std::sin(w * end) - std::sin(w * g.T)) / w;
        wsum += std::abs(weights[i]);
      }
      const double riemann = pairwise_sum(poly_eval_batch(s, table, g)) * g.delta;
      CHECK(std::abs(riemann - exact) <= 1.1 * g.delta * wsum);
    }
  }

  TEST_CASE("second moment matches the diagonal sum") {
    auto table = sieve(1000);
    PolySpec s{0.5, 1, 0.4, 31};
    auto v = poly_eval_batch(s, table, TGrid::covering(1e6, 31));
    double m2 = 0.0;
    for (double x : v) m2 += x * x;
    m2 /= v.size();
    double diag = 0.0;
    for (std::size_t i = 0; i < table.count_upto(31); ++i) {
      const double p = table.primes()[i];
      diag += 0.5 / (p * std::pow(std::log(p), 2));
    }
    CHECK(std::abs(m2 / diag - 1.0) < 0.02);
  }

  TEST_CASE("2k-th moment stays below 4 k! (sum |a_p|^2/p)^k") {
    auto table = sieve(1000);
    PolySpec s{0.5, 0, 0.0, 100};
    const auto g = TGrid::covering(2e5, 100);
    std::vector<double> mod2(g.count);
    stream_poly(s, table, g, [&](const GridChunk& c) {
      for (std::size_t i = 0; i < c.re.size(); ++i) mod2[c.first + i] = c.re[i] * c.re[i] + c.im[i] * c.im[i];
    });
    double base = 0.0;
    for (std::size_t i = 0; i < table.count_upto(100); ++i) base += 1.0 / table.primes()[i];
    for (int k = 1; k <= 4; ++k) {
      double mk = 0.0;
      for (double x : mod2) mk += std::pow(x, k);
      mk /= mod2.size();
      CHECK(mk <= 4.0 * std::tgamma(k + 1.0) * std::pow(base, k));
    }
  }

  TEST_CASE("lambda sums") {
    auto table = sieve(1000);
    const cplx v = lambda_sum(0, 2.0, 3, 0.0, table);
    CHECK(std::abs(v - cplx(1.0 / 4.0 + 1.0 / 9.0, 0.0)) < 1e-15);
    // n = 4 contributes log 2 / (16 (log 4)^{m+1}).
    const cplx w = lambda_sum(1, 2.0, 4, 0.0, table);
    const double expect = std::log(2.0) / (4.0 * std::pow(std::log(2.0), 2)) +
                          std::log(3.0) / (9.0 * std::pow(std::log(3.0), 2)) +
                          std::log(2.0) / (16.0 * std::pow(std::log(4.0), 2));
    CHECK(std::abs(w - cplx(expect, 0.0)) < 1e-15);
  }

  TEST_CASE("approximation defect for sigma > 1 is the series tail") {
    auto table = sieve(1'000'000);
    double prev = INFINITY;
    for (std::uint64_t X : {1000ull, 10000ull, 100000ull, 1000000ull}) {
      const double d = approximation_defect(1, 2.0, X, 10.0, table);
      // |sum_{n > X} Lambda(n) n^{-2-it} (log n)^{-2}| <= about 1 / (X log X)
      CHECK(d <= 1.2 / (X * std::log(double(X))));
      CHECK(d < prev);
      prev = d;
    }
    CHECK(std::isfinite(approximation_defect(1, 0.75, 10000, 40.0, sieve(10000))));
  }
}
