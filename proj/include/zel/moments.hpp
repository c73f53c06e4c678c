#pragma once

// Moments of the prime polynomial P(t) by three routes (exact enumeration of
// the multiplicative main term, a contour integral over the Bessel product,
// and grid averages), plus the Bessel product and the trimmed exp-moment.

#include <cstdint>
#include <string>
#include <vector>

#include "zel/prime_poly.hpp"

namespace zel {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// f(n) with f(p^a) = 2^{-a} C(a, a/2) for even a and 0 for odd a, extended
/// multiplicatively; returned in lowest terms. Throws DomainError for n = 0
/// and BudgetExceeded when the result does not fit 64-bit integers.
Rational f_value(std::uint64_t n);

enum class MomentMethod { empirical, exact_multiplicative, contour };
std::string to_string(MomentMethod m);

struct MomentResult {
  int k = 0;
  double value = 0.0;
  MomentMethod method = MomentMethod::exact_multiplicative;
  double err_estimate = 0.0;
  bool flagged = false;  // contour: saddle search fell back to R = k
  double radius = 0.0;   // contour radius R
  int nodes = 0;         // contour trapezoid nodes
  double refinement_delta = 0.0;  // empirical: |value(delta/2) - value(delta)|
};

inline constexpr std::size_t kExactMaxPrimes = 30;
inline constexpr int kExactMaxK = 12;

/// k! sum_{Omega(n) = k} f(n) g_X(n) n^{-sigma}. Odd k gives exactly 0.
/// Throws BudgetExceeded when pi(X) > 30 or k > 12.
MomentResult exact_moment(const PolySpec& spec, int k);
MomentResult exact_moment(const PolySpec& spec, int k, const PrimeTable& table);

struct ContourConfig {
  double r_min = 1e-3;
  double r_max = 1e6;
  double rel_tol = 1e-12;
  int max_nodes = 1 << 16;
  std::size_t max_primes = 100'000;
};

/// (k!/2 pi i) \oint_{|w|=R} w^{-k-1} prod_p I_0(w p^{-sigma} (log p)^{-m}) dw by the
/// periodic trapezoid rule, with R solving R L'(R) = k for L = log of the product.
MomentResult contour_moment(const PolySpec& spec, int k, const PrimeTable& table,
                            const ContourConfig& cfg = {});

/// Complex I_0 by its power series.
cplx bessel_i0_complex(cplx z);

/// Grid averages of P^k for several k in one pass over the grid. With
/// refine = true the grid is also evaluated at half spacing and the
/// difference enters err_estimate together with X^{2k}/T.
std::vector<MomentResult> empirical_moments(const PolySpec& spec, const PrimeTable& table,
                                            const TGrid& grid, const std::vector<int>& ks,
                                            bool refine = true, const StreamConfig& stream = {});
MomentResult empirical_moment(const PolySpec& spec, const PrimeTable& table, const TGrid& grid, int k,
                              bool refine = true, const StreamConfig& stream = {});

/// log prod_{p <= X} I_0(x p^{-sigma} (log p)^{-m}), accumulated in extended precision.
double bessel_product(const PolySpec& spec, const PrimeTable& table, double x);

/// As bessel_product, but X may exceed the table: primes beyond table.limit()
/// are replaced by the prime-number-theorem density 1/log u.
double bessel_product_extended(const PolySpec& spec, const PrimeTable& table, double x);

/// log of the grid average of exp(x P(t)) over t with |S(t)| <= W, where the
/// average is normalized by the full grid count. Throws DomainError when the
/// trimmed set is empty.
double exp_moment_trimmed(const PolySpec& spec, const PrimeTable& table, const TGrid& grid, double x,
                          double W, const StreamConfig& stream = {});

}  // namespace zel
