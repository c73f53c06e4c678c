#include "zel/special_fn.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "zel/errors.hpp"
#include "zel/quadrature.hpp"

namespace zel {

namespace {

constexpr int kMaxSeriesTerms = 60;
constexpr int kMaxAsymptoticTerms = 30;

void check_argument(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_i0: non-finite argument");
  if (x < 0.0) throw DomainError("bessel_i0: negative argument");
}

// sum_{n>=1} (x^2/4)^n / (n!)^2, i.e. I_0(x) - 1.
double series_minus_one(double x, double rel_err) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n <= kMaxSeriesTerms; ++n) {
    term *= q / (static_cast<double>(n) * n);
    sum += term;
    if (term <= rel_err * sum) break;
  }
  return sum;
}

// sum_k a_k x^{-k} with a_k = ((2k-1)!!)^2 / (k! 8^k); I_0(x) ~ e^x/sqrt(2 pi x) times this.
double asymptotic_factor(double x, double rel_err) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= kMaxAsymptoticTerms; ++k) {
    double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (next >= term) break;  // divergent tail begins
    term = next;
    sum += term;
    if (term <= rel_err) break;
  }
  return sum;
}

// Coefficients of log(sum_k c_k y^k) given c_0 = 1:
// d_n = c_n - (1/n) sum_{j=1}^{n-1} j d_j c_{n-j}.
std::vector<double> log_series(const std::vector<double>& c) {
  std::vector<double> d(c.size(), 0.0);
  for (std::size_t n = 1; n < c.size(); ++n) {
    double acc = 0.0;
    for (std::size_t j = 1; j < n; ++j) acc += static_cast<double>(j) * d[j] * c[n - j];
    d[n] = c[n] - acc / static_cast<double>(n);
  }
  return d;
}

// Taylor coefficients e_k of log I_0(u) = sum_{k>=1} e_k u^{2k}.
const std::vector<double>& log_i0_taylor() {
  static const std::vector<double> coeffs = [] {
    const int n = 48;
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    for (int k = 1; k <= n; ++k) c[k] = c[k - 1] * 0.25 / (static_cast<double>(k) * k);
    return log_series(c);
  }();
  return coeffs;
}

// Coefficients d_k of log(sum_k a_k y^k), y = 1/u, for the large-u expansion.
const std::vector<double>& log_i0_asymptotic() {
  static const std::vector<double> coeffs = [] {
    const int n = 24;
    std::vector<double> a(n + 1);
    a[0] = 1.0;
    for (int k = 1; k <= n; ++k) a[k] = a[k - 1] * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k);
    return log_series(a);
  }();
  return coeffs;
}

}  // namespace

double bessel_i0(double x, const BesselEvalConfig& cfg) {
  check_argument(x);
  if (x <= cfg.series_cutoff_abs) return 1.0 + series_minus_one(x, cfg.target_rel_err);
  return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) *
         asymptotic_factor(x, cfg.target_rel_err);
}

double log_bessel_i0(double x, const BesselEvalConfig& cfg) {
  check_argument(x);
  if (x <= cfg.series_cutoff_abs) return std::log1p(series_minus_one(x, cfg.target_rel_err));
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) +
         std::log(asymptotic_factor(x, cfg.target_rel_err));
}

double g_constant(double sigma, const GConstantConfig& cfg) {
  if (!(sigma > 0.5 && sigma < 1.0)) throw DomainError("g_constant: sigma must lie in (1/2, 1)");
  const double a = 1.0 / sigma;

  // (0, 1]: sum_k e_k / (2k - a). |e_k| decays like j_{0,1}^{-2k}, so the
  // neglected remainder is below the last magnitude retained.
  const auto& e = log_i0_taylor();
  double head = 0.0;
  for (std::size_t k = e.size() - 1; k >= 1; --k) head += e[k] / (2.0 * k - a);

  // [1, U]: smooth integrand.
  const double upper = cfg.tail_start;
  auto integrand = [a](double u) { return log_bessel_i0(u) * std::pow(u, -1.0 - a); };
  std::vector<double> breaks;
  for (double b = 1.0; b < upper; b *= 2.0) breaks.push_back(b);
  breaks.push_back(upper);
  auto mid = integrate_adaptive_partition<double>(integrand, breaks, 1e-17, cfg.panel_rel_tol,
                                                  cfg.gauss_order);

  // [U, inf): log I_0(u) = u - log(2 pi)/2 - log(u)/2 + sum_k d_k u^{-k}.
  const auto& d = log_i0_asymptotic();
  const double ua = std::pow(upper, -a);
  double tail = upper * ua / (a - 1.0);
  tail -= 0.5 * std::log(2.0 * std::numbers::pi) * ua / a;
  tail -= 0.5 * ua * (std::log(upper) / a + 1.0 / (a * a));
  double prev = HUGE_VAL;
  for (std::size_t k = 1; k < d.size(); ++k) {
    double term = d[k] * std::pow(upper, -static_cast<double>(k)) * ua / (k + a);
    if (std::abs(term) >= prev) break;  // asymptotic series: stop at the smallest term
    tail += term;
    prev = std::abs(term);
    if (prev < 1e-20) break;
  }
  return head + mid.value + tail;
}

double a_constant_with_g(int m, double sigma, double g) {
  if (m < 0) throw DomainError("a_constant: m must be nonnegative");
  if (!(sigma > 0.5 && sigma < 1.0)) throw DomainError("a_constant: sigma must lie in (1/2, 1)");
  if (!(g > 0.0)) throw DomainError("a_constant: G must be positive");
  // Evaluated in log space; the bracket can be large for sigma near 1.
  double log_inner = 2.0 * sigma * std::log(sigma) -
                     (2.0 * sigma - 1.0 + m) * std::log1p(-sigma) - sigma * std::log(g);
  return std::exp(log_inner / (1.0 - sigma));
}

double a_constant(int m, double sigma) { return a_constant_with_g(m, sigma, g_constant(sigma)); }

double kappa(double sigma) {
  // Exact comparison: callers select the critical-line branch with the literal 0.5.
  return sigma == 0.5 ? 0.0 : sigma;
}

}  // namespace zel
