#include "zel/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zel/errors.hpp"
#include "zel/special_fn.hpp"

namespace zel {

// ---------------------------------------------------------------------------
// Exceedance

namespace {

void check_v_grid(const std::vector<double>& V_grid) {
  if (V_grid.empty()) throw DomainError("exceedance: empty V grid");
  for (std::size_t i = 0; i < V_grid.size(); ++i) {
    if (!std::isfinite(V_grid[i])) throw DomainError("exceedance: non-finite V");
    if (i > 0 && !(V_grid[i] > V_grid[i - 1])) throw DomainError("exceedance: V grid must be strictly ascending");
  }
}

// hist[b] counts values v with exactly b grid entries below v.
inline void bin_value(const std::vector<double>& V_grid, double v, std::vector<std::int64_t>& hist) {
  auto idx = std::lower_bound(V_grid.begin(), V_grid.end(), v) - V_grid.begin();
  ++hist[static_cast<std::size_t>(idx)];
}

ExceedanceCurve curve_from_hist(const std::vector<double>& V_grid, const std::vector<std::int64_t>& hist,
                                const TGrid& grid, std::int64_t counted) {
  ExceedanceCurve c;
  c.V_grid = V_grid;
  c.grid = grid;
  const std::size_t n = V_grid.size();
  c.exceed_counts.assign(n, 0);
  c.measure_fraction.assign(n, 0.0);
  c.below_resolution.assign(n, false);
  std::int64_t above = 0;
  for (std::size_t i = n; i-- > 0;) {
    above += hist[i + 1];
    c.exceed_counts[i] = above;
    c.measure_fraction[i] = counted > 0 ? static_cast<double>(above) / static_cast<double>(counted) : 0.0;
    c.below_resolution[i] = above == 0;
  }
  return c;
}

}  // namespace

std::vector<ExceedanceCurve> measure_exceedance_poly(const PolySpec& spec, const std::vector<double>& thetas,
                                                     const PrimeTable& table, const TGrid& grid,
                                                     const std::vector<double>& V_grid,
                                                     const StreamConfig& stream) {
  check_v_grid(V_grid);
  if (thetas.empty()) throw DomainError("exceedance: no theta values");
  const std::size_t chunks = chunk_count(grid, stream);
  const std::size_t bins = V_grid.size() + 1;
  // [chunk][theta][bin]
  std::vector<std::vector<std::int64_t>> partial(chunks, std::vector<std::int64_t>(thetas.size() * bins, 0));
  std::vector<double> ct(thetas.size()), st(thetas.size());
  for (std::size_t q = 0; q < thetas.size(); ++q) {
    ct[q] = std::cos(thetas[q]);
    st[q] = std::sin(thetas[q]);
  }
  stream_poly(
      spec, table, grid,
      [&](const GridChunk& c) {
        auto& h = partial[c.index];
        std::vector<std::int64_t> hist(bins);
        for (std::size_t q = 0; q < thetas.size(); ++q) {
          std::fill(hist.begin(), hist.end(), 0);
          for (std::size_t i = 0; i < c.re.size(); ++i) bin_value(V_grid, ct[q] * c.re[i] + st[q] * c.im[i], hist);
          std::copy(hist.begin(), hist.end(), h.begin() + q * bins);
        }
      },
      stream);
  std::vector<ExceedanceCurve> out;
  for (std::size_t q = 0; q < thetas.size(); ++q) {
    std::vector<std::int64_t> hist(bins, 0);
    for (const auto& h : partial) {
      for (std::size_t b = 0; b < bins; ++b) hist[b] += h[q * bins + b];
    }
    auto curve = curve_from_hist(V_grid, hist, grid, grid.count);
    curve.theta = thetas[q];
    out.push_back(std::move(curve));
  }
  return out;
}

ExceedanceCurve measure_exceedance_poly(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                                        const std::vector<double>& V_grid, const StreamConfig& stream) {
  return measure_exceedance_poly(spec, {spec.theta}, table, grid, V_grid, stream).front();
}

ExceedanceCurve measure_exceedance_eta(int m, double sigma, double theta, const TGrid& grid,
                                       const std::vector<double>& V_grid, const QuadratureConfig& cfg) {
  check_v_grid(V_grid);
  if (grid.count > kEtaGridLimit) throw DomainError("exceedance_eta: grid exceeds the desk-scale limit of 1e5 points");
  if (m < 1) throw DomainError("exceedance_eta: m must be >= 1");
  const double ct = std::cos(theta), st = std::sin(theta);
  std::vector<std::int64_t> hist(V_grid.size() + 1, 0);
  std::int64_t excluded = 0;
  for (std::int64_t j = 0; j < grid.count; ++j) {
    try {
      cplx e = eta_tilde(m, sigma, grid.at(j), cfg);
      bin_value(V_grid, ct * e.real() + st * e.imag(), hist);
    } catch (const NearZeroOnPath&) {
      ++excluded;
    }
  }
  auto curve = curve_from_hist(V_grid, hist, grid, grid.count - excluded);
  curve.theta = theta;
  curve.excluded = excluded;
  curve.flagged = static_cast<double>(excluded) > 0.01 * static_cast<double>(grid.count);
  return curve;
}

// ---------------------------------------------------------------------------
// Saddle equations

double saddle_rhs_critical(double x, double X, int m) {
  const double lx = std::log(x);
  return 2.0 * x / (8.0 * m * std::pow(2.0 * lx, 2 * m)) * (1.0 - std::pow(2.0 * lx / std::log(X), 2 * m));
}

double saddle_rhs_strip(double x, double sigma, int m, double g) {
  const double lx = std::log(x);
  return std::pow(sigma, m / sigma) * g * std::pow(x, 1.0 / sigma - 1.0) /
         (sigma * std::pow(lx, m / sigma + 1.0));
}

namespace {

// First upward crossing of f in x = e^u on [u_lo, u_hi], then bisection in x
// down to adjacent doubles; returns the endpoint with the smaller residual.
template <class F>
double first_root(F&& f, double u_lo, double u_hi, const char* what) {
  const double step = 0.01;
  double a = u_lo;
  double fa = f(std::exp(a));
  if (fa >= 0.0) throw NoRootError(std::string(what) + ": equation already satisfied below x = 3");
  double b = a;
  double fb = fa;
  bool found = false;
  while (b < u_hi) {
    double nb = std::min(u_hi, b + step);
    double fn = f(std::exp(nb));
    if (fn >= 0.0) {
      a = b;
      fa = fb;
      b = nb;
      fb = fn;
      found = true;
      break;
    }
    b = nb;
    fb = fn;
  }
  if (!found) throw NoRootError(std::string(what) + ": no sign change in the bracket");
  double xa = std::exp(a), xb = std::exp(b);
  fa = f(xa);
  fb = f(xb);
  if (fa >= 0.0) return xa;
  for (int it = 0; it < 2000; ++it) {
    double xm = 0.5 * (xa + xb);
    if (xm <= xa || xm >= xb) break;
    double fm = f(xm);
    if (fm == 0.0) return xm;
    if (fm < 0.0) {
      xa = xm;
      fa = fm;
    } else {
      xb = xm;
      fb = fm;
    }
  }
  return std::abs(fa) <= std::abs(fb) ? xa : xb;
}

}  // namespace

double solve_saddle_critical(double V, double X, int m) {
  if (!(V >= 3.0) || !std::isfinite(V)) throw DomainError("solve_saddle_critical: V must be >= 3");
  if (m < 1) throw DomainError("solve_saddle_critical: m must be >= 1");
  if (!(X >= std::pow(V, 4)) || !std::isfinite(X)) throw DomainError("solve_saddle_critical: X must satisfy X >= V^4");
  const double u_hi = std::min(std::log(1e12), 0.5 * std::log(X));
  return first_root([&](double x) { return saddle_rhs_critical(x, X, m) - V; }, std::log(3.0), u_hi,
                    "solve_saddle_critical");
}

double solve_saddle_strip(double V, double sigma, int m) {
  if (!(V >= 3.0) || !std::isfinite(V)) throw DomainError("solve_saddle_strip: V must be >= 3");
  if (!(sigma > 0.5 && sigma < 1.0)) throw DomainError("solve_saddle_strip: sigma must lie in (1/2, 1)");
  if (m < 0) throw DomainError("solve_saddle_strip: m must be >= 0");
  const double g = g_constant(sigma);
  // The right-hand side dips below its value at 3 before it grows; start the
  // scan past the dip so the first crossing is the growing branch.
  const double u_min = std::max(std::log(3.0), (m / sigma + 1.0) / (1.0 / sigma - 1.0));
  return first_root([&](double x) { return saddle_rhs_strip(x, sigma, m, g) - V; }, u_min, 700.0,
                    "solve_saddle_strip");
}

double saddle_closed_form_critical(double V, double X, int m) {
  const double lv = std::log(V);
  return 4.0 * m * std::pow(4.0, m) * V * std::pow(lv, 2 * m) /
         (1.0 - std::pow(2.0 * lv / std::log(X), 2 * m));
}

double saddle_closed_form_strip(double V, double sigma, int m) {
  const double lv = std::log(V);
  return a_constant(m, sigma) / (1.0 - sigma) * std::pow(V, sigma / (1.0 - sigma)) *
         std::pow(lv, (m + sigma) / (1.0 - sigma));
}

// ---------------------------------------------------------------------------
// Predictions

std::string to_string(TailFamily f) {
  switch (f) {
    case TailFamily::critical_poly: return "critical_poly";
    case TailFamily::critical_eta: return "critical_eta";
    case TailFamily::strip_poly: return "strip_poly";
    case TailFamily::strip_eta: return "strip_eta";
  }
  return "unknown";
}

TailFamily parse_tail_family(const std::string& s) {
  for (auto f : {TailFamily::critical_poly, TailFamily::critical_eta, TailFamily::strip_poly, TailFamily::strip_eta}) {
    if (to_string(f) == s) return f;
  }
  throw DomainError("unknown tail family '" + s + "'");
}

TailPrediction predict_tail(TailFamily family, double V, const TailParams& p, const RangeConstants& k) {
  if (!(V >= 3.0) || !std::isfinite(V)) throw DomainError("predict_tail: V must be >= 3");
  if (p.X && !(*p.X > 1.0 && std::isfinite(*p.X))) throw DomainError("predict_tail: X must exceed 1");
  if (p.T && !(*p.T > std::exp(1.0) && std::isfinite(*p.T))) throw DomainError("predict_tail: T must exceed e");
  TailPrediction out;
  out.family = family;
  out.V = V;
  const double lv = std::log(V);
  const double llv = std::log(lv);
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) {
      out.valid = false;
      out.violations.push_back(what);
    }
  };
  auto unchecked = [&](const std::string& what) { out.violations.push_back("unchecked:" + what); };
  const bool critical = family == TailFamily::critical_poly || family == TailFamily::critical_eta;

  if (critical) {
    if (p.m < 1) throw DomainError("predict_tail: critical families need m >= 1");
    const int m = p.m;
    const double base = 2.0 * m * std::pow(4.0, m) * V * V * std::pow(lv, 2 * m);
    if (family == TailFamily::critical_poly) {
      if (!p.X) throw DomainError("predict_tail: critical_poly requires X");
      const double X = *p.X;
      const double denom = 1.0 - std::pow(2.0 * lv / std::log(X), m);
      if (!(denom > 0.0)) throw DomainError("predict_tail: critical_poly needs X > V^2");
      out.exponent = base / denom;
      out.error_window = std::sqrt(llv / lv);
      require(std::pow(V, 4) <= X, "V^4<=X");
      if (p.T) {
        const double lt = std::log(*p.T);
        require(V <= k.a[2] * std::sqrt(lt) / std::pow(std::log(lt), m + 0.5), "V<=a2*sqrt(logT)/(loglogT)^(m+1/2)");
        require(std::log(X) <= k.a[3] / (V * V * std::pow(lv, 2 * m)) * lt, "X<=T^(a3/(V^2(logV)^(2m)))");
      } else {
        unchecked("T");
      }
    } else {
      if (!p.T) throw DomainError("predict_tail: critical_eta requires T");
      const double lt = std::log(*p.T);
      out.exponent = base;
      out.error_window =
          std::pow(V, 2 * m + 1) * std::pow(lv, 2.0 * m * (m + 1)) / std::pow(lt, m) + std::sqrt(llv / lv);
      require(V <= k.a[1] * std::pow(lt / std::pow(std::log(lt), 2 * m + 2), static_cast<double>(m) / (2 * m + 1)),
              "V<=a1*(logT/(loglogT)^(2m+2))^(m/(2m+1))");
    }
  } else {
    const double s = p.sigma;
    const int m = p.m;
    if (!(s > 0.5 && s < 1.0)) throw DomainError("predict_tail: strip families need 1/2 < sigma < 1");
    if (m < 0) throw DomainError("predict_tail: m must be >= 0");
    out.exponent = a_constant(m, s) * std::pow(V, 1.0 / (1.0 - s)) * std::pow(lv, (m + s) / (1.0 - s));
    out.error_window = std::sqrt((1.0 + m * llv) / lv);
    const double a_t = family == TailFamily::strip_poly ? k.a[5] : k.a[4];
    if (p.T) {
      const double lt = std::log(*p.T);
      require(V <= a_t * std::pow(lt, 1.0 - s) / std::pow(std::log(lt), m + 1), "V<=a*(logT)^(1-sigma)/(loglogT)^(m+1)");
    } else {
      unchecked("T");
    }
    if (family == TailFamily::strip_poly) {
      if (!p.X) throw DomainError("predict_tail: strip_poly requires X");
      const double X = *p.X;
      require(std::pow(V, 4.0 * s / (1.0 - s)) <= X, "V^(4sigma/(1-sigma))<=X");
      if (p.T) {
        const double lt = std::log(*p.T);
        require(std::log(X) <= k.a[6] / (std::pow(V, 1.0 / (1.0 - s)) * std::pow(lv, (m + s) / (1.0 - s))) * lt,
                "X<=T^(a6/(V^(1/(1-sigma))(logV)^((m+sigma)/(1-sigma))))");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TrimResult trim_set_A(const PolySpec& spec, const PrimeTable& table, const TGrid& grid, double W,
                      const StreamConfig& stream) {
  if (spec.m == 0 && spec.sigma == 0.5) throw DomainError("trim_set_A: (m, sigma) = (0, 1/2) is excluded");
  if (!(W >= 0.0)) throw DomainError("trim_set_A: W must be nonnegative");
  const std::size_t chunks = chunk_count(grid, stream);
  std::vector<std::vector<std::int64_t>> parts(chunks);
  const double w2 = W * W;
  stream_poly(
      spec, table, grid,
      [&](const GridChunk& c) {
        auto& out = parts[c.index];
        for (std::size_t i = 0; i < c.re.size(); ++i) {
          if (c.re[i] * c.re[i] + c.im[i] * c.im[i] <= w2) out.push_back(c.first + static_cast<std::int64_t>(i));
        }
      },
      stream);
  TrimResult r;
  for (auto& p : parts) r.indices.insert(r.indices.end(), p.begin(), p.end());
  r.complement_fraction =
      static_cast<double>(grid.count - static_cast<std::int64_t>(r.indices.size())) / static_cast<double>(grid.count);
  return r;
}

double log_ratio(double fraction, double exponent) {
  if (!(fraction > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(fraction) / (-exponent);
}

}  // namespace zel
