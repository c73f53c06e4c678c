#pragma once

// Exceedance measures of the prime polynomial and of Re e^{-i theta} eta~_m,
// the saddle-point equations that link V to the exponential-moment parameter
// x, and the predicted tail exponents.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zel/prime_poly.hpp"

namespace zel {

struct ExceedanceCurve {
  std::vector<double> V_grid;
  std::vector<double> measure_fraction;
  std::vector<std::int64_t> exceed_counts;
  std::vector<bool> below_resolution;  // zero counts: fraction < 1 / counted points
  TGrid grid;
  double theta = 0.0;
  std::int64_t excluded = 0;  // points dropped (near-zero-on-path)
  bool flagged = false;       // excluded fraction above 1%
};

/// Fraction of grid points with P(t) > V, for each V (ascending).
ExceedanceCurve measure_exceedance_poly(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                                        const std::vector<double>& V_grid, const StreamConfig& stream = {});

/// One pass over the grid serving several theta values: P_theta = cos theta Re S + sin theta Im S.
std::vector<ExceedanceCurve> measure_exceedance_poly(const PolySpec& spec, const std::vector<double>& thetas,
                                                     const PrimeTable& table, const TGrid& grid,
                                                     const std::vector<double>& V_grid,
                                                     const StreamConfig& stream = {});

inline constexpr std::int64_t kEtaGridLimit = 100'000;

/// Exceedance of Re e^{-i theta} eta~_m(sigma + it) on the grid. Points where
/// the branch continuation meets a near-zero are excluded and counted.
/// Throws DomainError for grids above kEtaGridLimit points.
ExceedanceCurve measure_exceedance_eta(int m, double sigma, double theta, const TGrid& grid,
                                       const std::vector<double>& V_grid, const QuadratureConfig& cfg = {});

/// Smallest root x >= 3 of V = 2x/(8m(2 log x)^{2m}) (1 - (log x^2/log X)^{2m}).
/// Throws NoRootError when no sign change lies in [3, min(1e12, sqrt X)].
double solve_saddle_critical(double V, double X, int m);

/// Root x >= 3 of V = sigma^{m/sigma} G(sigma) x^{1/sigma-1} / (sigma (log x)^{m/sigma+1}).
double solve_saddle_strip(double V, double sigma, int m);

/// Right-hand sides of the two saddle equations.
double saddle_rhs_critical(double x, double X, int m);
double saddle_rhs_strip(double x, double sigma, int m, double g);

/// Closed-form approximations of the saddle roots.
double saddle_closed_form_critical(double V, double X, int m);
double saddle_closed_form_strip(double V, double sigma, int m);

enum class TailFamily { critical_poly, critical_eta, strip_poly, strip_eta };
std::string to_string(TailFamily f);
TailFamily parse_tail_family(const std::string& s);

struct TailParams {
  int m = 1;
  double sigma = 0.5;
  double theta = 0.0;
  std::optional<double> X;
  std::optional<double> T;
};

/// Unnamed constants from the range conditions; used for advisory flags only.
struct RangeConstants {
  double a[7] = {0.0, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01};  // a[1]..a[6]
  double b[7] = {0.0, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01};  // b[1]..b[6]
};

struct TailPrediction {
  TailFamily family = TailFamily::critical_poly;
  double V = 0.0;
  double exponent = 0.0;      // prediction = exp(-exponent)
  double error_window = 0.0;  // R with implied constant 1
  bool valid = true;          // every checkable range condition holds
  std::vector<std::string> violations;  // failed or unchecked conditions
};

/// Throws DomainError on V < 3 or missing/invalid family parameters.
TailPrediction predict_tail(TailFamily family, double V, const TailParams& params,
                            const RangeConstants& constants = {});

struct TrimResult {
  std::vector<std::int64_t> indices;  // grid points with |S(t)| <= W
  double complement_fraction = 0.0;
};

/// Grid points where the unrotated polynomial has modulus at most W.
TrimResult trim_set_A(const PolySpec& spec, const PrimeTable& table, const TGrid& grid, double W,
                      const StreamConfig& stream = {});

/// log(measured fraction) / (-exponent); NaN when the fraction is 0.
double log_ratio(double fraction, double exponent);

}  // namespace zel
