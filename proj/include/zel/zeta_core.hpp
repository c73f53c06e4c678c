#pragma once

// The Riemann zeta function, log zeta on the branch continued horizontally
// from sigma = +inf, the iterated horizontal integrals eta~_m, and the
// vertical integrals S_m with their constants c_m, b_m.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace zel {

using cplx = std::complex<double>;

struct ZetaResult {
  cplx value;
  double err_estimate = 0.0;  // magnitude of the last Euler-Maclaurin term kept
  bool target_met = true;     // err_estimate <= 1e-12 |value|
};

/// zeta(s) by Euler-Maclaurin summation. Throws DomainError at s = 1.
cplx zeta(cplx s);
ZetaResult zeta_checked(cplx s);

/// Repeated zeta evaluations at a fixed height t: the oscillating factors
/// n^{-it} are computed once, so each call costs one real exp per term.
class ZetaLine {
 public:
  explicit ZetaLine(double t, double max_sigma = 10.0);

  ZetaResult operator()(double sigma) const;
  double t() const noexcept { return t_; }
  int terms() const noexcept { return n_; }

 private:
  double t_;
  int n_;  // Euler-Maclaurin cut point N
  std::vector<double> log_n_;
  std::vector<double> cos_n_;
  std::vector<double> sin_n_;
};

struct QuadratureConfig {
  double panel_rel_tol = 1e-10;
  // Split between Gauss-Legendre panels and the closed-form Dirichlet-series
  // tail of the horizontal integral.
  double alpha_split = 8.0;
  int tail_terms = 100;
  int max_subdivisions = 40;
};

/// Validates the invariants alpha_split >= 2, tail_terms >= 16.
void validate(const QuadratureConfig& cfg);

struct BranchedLog {
  cplx value;                      // log zeta(sigma + it)
  double path_origin_sigma = 10.0; // where the continuation started
  long unwind_count = 0;           // (Im value - Arg zeta) / 2 pi
};

/// log zeta(sigma + i t) along one horizontal line, on the branch fixed by
/// continuity from sigma = max(10, sigma). Evaluated points are kept as
/// anchors so later requests continue from the nearest one.
class LogZetaLine {
 public:
  explicit LogZetaLine(double t, const QuadratureConfig& cfg = {});

  BranchedLog at(double sigma);
  double t() const noexcept { return zeta_.t(); }

 private:
  struct Anchor {
    cplx log_value;
    cplx zeta_value;
  };

  cplx step_to(double from, const Anchor& start, double target, cplx& zeta_out);

  QuadratureConfig cfg_;
  ZetaLine zeta_;
  std::map<double, Anchor> anchors_;
};

BranchedLog log_zeta_branched(double sigma, double t, const QuadratureConfig& cfg = {});

struct EtaResult {
  cplx value;
  double quad_err = 0.0;    // panel error estimate on [sigma, alpha_split]
  double tail_bound = 0.0;  // certified bound on the truncated Dirichlet tail
  int tail_terms = 0;
};

/// eta~_m(sigma + it) = (1/(m-1)!) int_sigma^inf (alpha-sigma)^{m-1} log zeta(alpha+it) d alpha.
EtaResult eta_tilde_detailed(int m, double sigma, double t, const QuadratureConfig& cfg = {});
cplx eta_tilde(int m, double sigma, double t, const QuadratureConfig& cfg = {});

/// c_m(sigma) = i^m/(m-1)! int_sigma^inf (alpha-sigma)^{m-1} log zeta(alpha) d alpha
/// with log zeta on the real axis taken as the limit from above:
/// log|zeta(alpha)| - i pi for alpha < 1.
cplx c_constant(int m, double sigma, const QuadratureConfig& cfg = {});

/// b_m = Im c_m(1/2) / pi.
double b_constant(int m, const QuadratureConfig& cfg = {});

struct SmResult {
  double value = 0.0;
  std::vector<double> jumps;  // detected discontinuities of S_0 in (0, t)
  double err_estimate = 0.0;
};

/// S_0(t) = Im log zeta(1/2 + it)/pi and S_m(t) = int_0^t S_{m-1} + b_m.
SmResult s_m_detailed(int m, double t, const QuadratureConfig& cfg = {});
double s_m(int m, double t, const QuadratureConfig& cfg = {});

/// Thread-safe memo of zeta values keyed by the exact (sigma, t) pair, with
/// an optional on-disk form: magic "ZGRD1" followed by little-endian float64
/// records (sigma, t, Re zeta, Im zeta).
class ZetaCache {
 public:
  ZetaCache() = default;
  ZetaCache(ZetaCache&& other) noexcept;
  ZetaCache& operator=(ZetaCache&& other) noexcept;

  cplx get_or_compute(double sigma, double t);
  std::optional<cplx> find(double sigma, double t) const;
  void insert(double sigma, double t, cplx value);
  std::size_t size() const;

  void save(const std::filesystem::path& path) const;
  static ZetaCache load(const std::filesystem::path& path);

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  static Key key(double sigma, double t);

  mutable std::mutex mu_;
  std::map<Key, cplx> table_;
};

}  // namespace zel
