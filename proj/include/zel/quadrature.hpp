#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace zel {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rules are computed once per order and cached; the returned reference
// stays valid for the program lifetime.
const GaussLegendreRule& gauss_legendre(int order);

template <class T>
struct QuadResult {
  T value{};
  double err_estimate = 0.0;
  int panels = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
T gl_panel(F& f, double a, double b, const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  T acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return acc * half;
}

template <class T, class F>
void adaptive_step(F& f, double a, double b, T whole, double abs_tol, double rel_tol,
                   int depth, int max_depth, const GaussLegendreRule& rule,
                   QuadResult<T>& out) {
  const double mid = 0.5 * (a + b);
  T left = gl_panel<T>(f, a, mid, rule);
  T right = gl_panel<T>(f, mid, b, rule);
  T both = left + right;
  double diff = magnitude(both - whole);
  double tol = std::max(abs_tol, rel_tol * magnitude(both));
  if (diff <= tol || depth >= max_depth) {
    out.value += both;
    out.err_estimate += diff;
    out.panels += 2;
    return;
  }
  adaptive_step<T>(f, a, mid, left, 0.5 * abs_tol, rel_tol, depth + 1, max_depth, rule, out);
  adaptive_step<T>(f, mid, b, right, 0.5 * abs_tol, rel_tol, depth + 1, max_depth, rule, out);
}

}  // namespace detail

// Adaptive panel bisection with a fixed Gauss-Legendre rule: a panel is
// accepted once its two halves agree with the whole to the tolerance.
// Panels are visited left to right.
template <class T, class F>
QuadResult<T> integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                                 int order = 20, int max_depth = 30) {
  QuadResult<T> out;
  if (a == b) return out;
  const auto& rule = gauss_legendre(order);
  T whole = detail::gl_panel<T>(f, a, b, rule);
  detail::adaptive_step<T>(f, a, b, whole, abs_tol, rel_tol, 0, max_depth, rule, out);
  return out;
}

// Same as integrate_adaptive but starting from a fixed partition.
template <class T, class F>
QuadResult<T> integrate_adaptive_partition(F&& f, const std::vector<double>& breaks,
                                           double abs_tol, double rel_tol, int order = 20,
                                           int max_depth = 30) {
  QuadResult<T> out;
  if (breaks.size() < 2) return out;
  const double span = breaks.back() - breaks.front();
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double w = breaks[i + 1] - breaks[i];
    auto part = integrate_adaptive<T>(f, breaks[i], breaks[i + 1],
                                      span > 0 ? abs_tol * w / span : abs_tol, rel_tol,
                                      order, max_depth);
    out.value += part.value;
    out.err_estimate += part.err_estimate;
    out.panels += part.panels;
  }
  return out;
}

}  // namespace zel
