#pragma once

// Modified Bessel function I_0 on the nonnegative real axis and the tail
// constants built from it.

namespace zel {

struct BesselEvalConfig {
  // Power series below this argument, large-argument expansion above.
  double series_cutoff_abs = 20.0;
  double target_rel_err = 1e-15;
};

/// I_0(x) for finite x >= 0. Overflows to +inf past x ~ 713, like exp(x).
double bessel_i0(double x, const BesselEvalConfig& cfg = {});

/// log I_0(x), finite for every finite x >= 0.
double log_bessel_i0(double x, const BesselEvalConfig& cfg = {});

struct GConstantConfig {
  int gauss_order = 20;
  // Start of the closed-form tail integral.
  double tail_start = 30.0;
  double panel_rel_tol = 1e-14;
};

/// G(sigma) = int_0^inf log I_0(u) u^{-1-1/sigma} du for 1/2 < sigma < 1.
///
/// The integral is split at u = 1 and at u = tail_start. On (0, 1] the
/// Taylor series of log I_0 is integrated term by term; on [tail_start, inf)
/// the large-argument expansion is integrated in closed form; the middle
/// piece uses adaptive Gauss-Legendre panels.
double g_constant(double sigma, const GConstantConfig& cfg = {});

/// A_m(sigma) = (sigma^{2 sigma} / ((1-sigma)^{2 sigma - 1 + m} G^sigma))^{1/(1-sigma)}
/// with G = g_constant(sigma).
double a_constant(int m, double sigma);

/// Same closed form with an explicit G value.
double a_constant_with_g(int m, double sigma, double g);

/// kappa(sigma): 0 at exactly sigma == 0.5, sigma otherwise.
double kappa(double sigma);

}  // namespace zel
