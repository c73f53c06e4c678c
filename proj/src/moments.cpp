#include "zel/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>

#include "zel/errors.hpp"
#include "zel/quadrature.hpp"
#include "zel/special_fn.hpp"

namespace zel {

std::string to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::empirical: return "empirical";
    case MomentMethod::exact_multiplicative: return "exact";
    case MomentMethod::contour: return "contour";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

namespace {

Rational reduce(__int128 num, __int128 den) {
  if (num == 0) return {0, 1};
  __int128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    __int128 r = a % b;
    a = b;
    b = r;
  }
  num /= a;
  den /= a;
  constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
  if (num > lim || den > lim) throw BudgetExceeded("f_value: result exceeds 64-bit range");
  return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

// 2^{-a} C(a, a/2) for even a.
Rational prime_power_f(int a) {
  if (a % 2 != 0) return {0, 1};
  __int128 c = 1;
  for (int i = 1; i <= a / 2; ++i) {
    c = c * (a / 2 + i) / i;
    if (c > (static_cast<__int128>(1) << 100)) throw BudgetExceeded("f_value: exponent too large");
  }
  if (a >= 126) throw BudgetExceeded("f_value: exponent too large");
  return reduce(c, static_cast<__int128>(1) << a);
}

double lgamma1(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

Rational f_value(std::uint64_t n) {
  if (n == 0) throw DomainError("f_value: n must be positive");
  Rational out{1, 1};
  auto absorb = [&](int a) {
    Rational r = prime_power_f(a);
    out = reduce(static_cast<__int128>(out.num) * r.num, static_cast<__int128>(out.den) * r.den);
  };
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    int a = 0;
    while (n % p == 0) {
      n /= p;
      ++a;
    }
    if (a > 0) absorb(a);
    if (out.num == 0) return out;
  }
  if (n > 1) absorb(1);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Sum over beta_i >= 0 with sum beta_i = half of prod_i c_i^{beta_i} / (beta_i!)^2.
double enumerate_even(const std::vector<double>& c, std::size_t i, int half) {
  if (half == 0) return 1.0;
  if (i == c.size()) return 0.0;
  double total = 0.0;
  double pw = 1.0;  // c_i^b / (b!)^2
  for (int b = 0; b <= half; ++b) {
    if (b > 0) pw *= c[i] / (static_cast<double>(b) * b);
    total += pw * enumerate_even(c, i + 1, half - b);
  }
  return total;
}

}  // namespace

MomentResult exact_moment(const PolySpec& spec, int k, const PrimeTable& table) {
  validate(spec);
  if (k < 1) throw DomainError("exact_moment: k must be positive");
  if (k > kExactMaxK) throw BudgetExceeded("exact_moment: k exceeds the enumeration budget");
  const auto w = poly_weights(spec, table);
  if (w.size() > kExactMaxPrimes) throw BudgetExceeded("exact_moment: pi(X) exceeds the enumeration budget");
  MomentResult r;
  r.k = k;
  r.method = MomentMethod::exact_multiplicative;
  if (k % 2 != 0) return r;
  // f(p^{2b}) g_X(p^{2b}) p^{-2b sigma} = (w_p^2/4)^b / (b!)^2.
  std::vector<double> c(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = 0.25 * w[i] * w[i];
  r.value = factorial(k) * enumerate_even(c, 0, k / 2);
  return r;
}

MomentResult exact_moment(const PolySpec& spec, int k) {
  validate(spec);
  if (spec.X > 1000) throw BudgetExceeded("exact_moment: pi(X) exceeds the enumeration budget");
  return exact_moment(spec, k, PrimeTable::sieve(std::max<std::uint64_t>(spec.X, 2)));
}

// ---------------------------------------------------------------------------

cplx bessel_i0_complex(cplx z) {
  const cplx q = 0.25 * z * z;
  cplx term(1.0, 0.0);
  cplx sum = term;
  const double bound = 0.5 * std::abs(z);
  for (int n = 1; n < 10000; ++n) {
    term *= q / (static_cast<double>(n) * n);
    sum += term;
    if (n > bound && std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

namespace {

double log_product(const std::vector<double>& w, double r) {
  long double s = 0.0L;
  for (double wp : w) s += log_bessel_i0(r * wp);
  return static_cast<double>(s);
}

// d log prod I_0(e^u w_p) / du, monotone increasing in u.
double log_slope(const std::vector<double>& w, double u) {
  const double h = 1e-5;
  return (log_product(w, std::exp(u + h)) - log_product(w, std::exp(u - h))) / (2.0 * h);
}

// (1/M) sum_j Re(e^{-ik phi_j} F(R e^{i phi_j}) / e^{L(R)}), phi_j = 2 pi j / M.
double trapezoid_mean(const std::vector<double>& w, int k, double r, double log_norm, int nodes) {
  std::vector<double> vals(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / nodes;
    const cplx z = std::polar(r, phi);
    // Accumulate log F to avoid overflow across many factors.
    cplx logf(0.0, 0.0);
    for (double wp : w) logf += std::log(bessel_i0_complex(z * wp));
    const cplx v = std::exp(logf - log_norm - cplx(0.0, k * phi));
    vals[j] = v.real();
  }
  return pairwise_sum(vals) / nodes;
}

}  // namespace

MomentResult contour_moment(const PolySpec& spec, int k, const PrimeTable& table, const ContourConfig& cfg) {
  validate(spec);
  if (k < 1) throw DomainError("contour_moment: k must be positive");
  const auto w = poly_weights(spec, table);
  if (w.size() > cfg.max_primes) throw BudgetExceeded("contour_moment: pi(X) exceeds the budget");

  MomentResult r;
  r.k = k;
  r.method = MomentMethod::contour;

  // Saddle radius: bisection on u = log R for u L'(u) = k.
  double lo = std::log(cfg.r_min), hi = std::log(cfg.r_max);
  double radius;
  if (log_slope(w, lo) < k && log_slope(w, hi) > k) {
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      (log_slope(w, mid) < k ? lo : hi) = mid;
    }
    radius = std::exp(0.5 * (lo + hi));
  } else {
    radius = k;
    r.flagged = true;
  }
  r.radius = radius;

  const double log_norm = log_product(w, radius);
  // The moment equals scale * mean, with |mean| <= 1.
  const double log_scale = lgamma1(k) + log_norm - k * std::log(radius);
  const double scale = std::exp(log_scale);
  if (!std::isfinite(scale)) throw BudgetExceeded("contour_moment: result overflows");

  int nodes = std::max(64, 8 * k);
  double mean = trapezoid_mean(w, k, radius, log_norm, nodes);
  double delta = std::numeric_limits<double>::infinity();
  while (nodes < cfg.max_nodes) {
    nodes *= 2;
    double next = trapezoid_mean(w, k, radius, log_norm, nodes);
    delta = std::abs(next - mean);
    mean = next;
    if (delta <= cfg.rel_tol * std::max(std::abs(mean), 1e-300) || delta <= 1e-16) break;
  }
  r.nodes = nodes;
  r.value = scale * mean;
  r.err_estimate = scale * delta;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> grid_power_means(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                                     const std::vector<int>& ks, const StreamConfig& stream) {
  const double ct = std::cos(spec.theta), st = std::sin(spec.theta);
  const std::size_t chunks = chunk_count(grid, stream);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(ks.size(), 0.0));
  const int kmax = *std::max_element(ks.begin(), ks.end());
  stream_poly(
      spec, table, grid,
      [&](const GridChunk& c) {
        std::vector<std::vector<double>> buf(ks.size(), std::vector<double>(c.re.size()));
        for (std::size_t i = 0; i < c.re.size(); ++i) {
          const double p = ct * c.re[i] + st * c.im[i];
          double pw = 1.0;
          for (int e = 1; e <= kmax; ++e) {
            pw *= p;
            for (std::size_t q = 0; q < ks.size(); ++q) {
              if (ks[q] == e) buf[q][i] = pw;
            }
          }
        }
        for (std::size_t q = 0; q < ks.size(); ++q) partial[c.index][q] = pairwise_sum(buf[q]);
      },
      stream);
  std::vector<double> out(ks.size());
  std::vector<double> col(chunks);
  for (std::size_t q = 0; q < ks.size(); ++q) {
    for (std::size_t c = 0; c < chunks; ++c) col[c] = partial[c][q];
    out[q] = pairwise_sum(col) / static_cast<double>(grid.count);
  }
  return out;
}

}  // namespace

std::vector<MomentResult> empirical_moments(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                                            const std::vector<int>& ks, bool refine,
                                            const StreamConfig& stream) {
  validate(spec);
  if (ks.empty()) return {};
  double abs_sum = 0.0;
  for (double w : poly_weights(spec, table)) abs_sum += w;
  for (int k : ks) {
    if (k < 1) throw DomainError("empirical_moment: k must be positive");
    if (k * std::log(std::max(abs_sum, 1.0)) > 700.0) {
      throw BudgetExceeded("empirical_moment: P^k may overflow");
    }
  }
  const auto base = grid_power_means(spec, table, grid, ks, stream);
  std::vector<double> fine;
  if (refine) fine = grid_power_means(spec, table, grid.refined(), ks, stream);

  std::vector<MomentResult> out;
  const double log_x = std::log(static_cast<double>(spec.X));
  for (std::size_t q = 0; q < ks.size(); ++q) {
    MomentResult r;
    r.k = ks[q];
    r.method = MomentMethod::empirical;
    r.value = base[q];
    if (refine) r.refinement_delta = std::abs(fine[q] - base[q]);
    r.err_estimate = r.refinement_delta + std::exp(2.0 * ks[q] * log_x - std::log(grid.T));
    out.push_back(r);
  }
  return out;
}

MomentResult empirical_moment(const PolySpec& spec, const PrimeTable& table, const TGrid& grid, int k,
                              bool refine, const StreamConfig& stream) {
  return empirical_moments(spec, table, grid, {k}, refine, stream).front();
}

// ---------------------------------------------------------------------------

double bessel_product(const PolySpec& spec, const PrimeTable& table, double x) {
  validate(spec);
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bessel_product: x must be finite and >= 0");
  const auto w = poly_weights(spec, table);
  long double s = 0.0L;
  for (double wp : w) s += log_bessel_i0(x * wp);
  return static_cast<double>(s);
}

double bessel_product_extended(const PolySpec& spec, const PrimeTable& table, double x) {
  if (spec.X <= table.limit()) return bessel_product(spec, table, x);
  PolySpec head = spec;
  head.X = table.limit();
  double s = bessel_product(head, table, x);
  // int_Y^X log I_0(x u^{-sigma} (log u)^{-m}) du / log u, in v = log u.
  const double sigma = spec.sigma;
  const int m = spec.m;
  auto integrand = [&](double v) {
    double arg = x * std::exp(-sigma * v) * std::pow(v, -m);
    return log_bessel_i0(arg) * std::exp(v) / v;
  };
  const double a = std::log(static_cast<double>(table.limit()));
  const double b = std::log(static_cast<double>(spec.X));
  std::vector<double> breaks;
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
  for (int i = 0; i <= pieces; ++i) breaks.push_back(a + (b - a) * i / pieces);
  auto q = integrate_adaptive_partition<double>(integrand, breaks, 0.0, 1e-12);
  return s + q.value;
}

// ---------------------------------------------------------------------------

double exp_moment_trimmed(const PolySpec& spec, const PrimeTable& table, const TGrid& grid, double x, double W,
                          const StreamConfig& stream) {
  validate(spec);
  if (!(x > 0.0) || !(W > 0.0)) throw DomainError("exp_moment_trimmed: x and W must be positive");
  const double ct = std::cos(spec.theta), st = std::sin(spec.theta);
  const std::size_t chunks = chunk_count(grid, stream);
  // Per chunk: shift (max exponent) and sum of exp(exponent - shift).
  std::vector<double> shift(chunks, -std::numeric_limits<double>::infinity());
  std::vector<double> sum(chunks, 0.0);
  const double w2 = W * W;
  stream_poly(
      spec, table, grid,
      [&](const GridChunk& c) {
        std::vector<double> e;
        e.reserve(c.re.size());
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c.re.size(); ++i) {
          if (c.re[i] * c.re[i] + c.im[i] * c.im[i] > w2) continue;
          double v = x * (ct * c.re[i] + st * c.im[i]);
          e.push_back(v);
          mx = std::max(mx, v);
        }
        if (e.empty()) return;
        for (double& v : e) v = std::exp(v - mx);
        shift[c.index] = mx;
        sum[c.index] = pairwise_sum(e);
      },
      stream);
  double top = *std::max_element(shift.begin(), shift.end());
  if (!std::isfinite(top)) throw DomainError("exp_moment_trimmed: trimmed set is empty");
  std::vector<double> scaled(chunks);
  for (std::size_t c = 0; c < chunks; ++c) scaled[c] = sum[c] == 0.0 ? 0.0 : sum[c] * std::exp(shift[c] - top);
  return top + std::log(pairwise_sum(scaled)) - std::log(static_cast<double>(grid.count));
}

}  // namespace zel
