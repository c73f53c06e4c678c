#pragma once

// Prime tables and the prime Dirichlet polynomials
//   P(t) = Re e^{-i theta} sum_{p <= X} p^{-sigma-it} (log p)^{-m},
// evaluated pointwise or in streaming batches over a uniform t-grid.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "zel/zeta_core.hpp"

namespace zel {

inline constexpr std::uint64_t kMaxSieveLimit = 100'000'000;

class PrimeTable {
 public:
  PrimeTable() = default;

  std::uint64_t limit() const noexcept { return limit_; }
  std::size_t size() const noexcept { return primes_.size(); }
  const std::vector<std::uint64_t>& primes() const noexcept { return primes_; }
  const std::vector<double>& logs() const noexcept { return logs_; }

  /// Number of primes <= x.
  std::size_t count_upto(std::uint64_t x) const;

  /// p^{-sigma} for every prime in the table, computed once per sigma.
  std::shared_ptr<const std::vector<double>> inv_powers(double sigma) const;

  /// Exact primes <= limit by a segmented sieve of Eratosthenes.
  static PrimeTable sieve(std::uint64_t limit);

  /// Like sieve(), but reuses "<ZEL_CACHE_DIR>/ptab_<limit>.bin" when the
  /// variable is set. File: "PTAB1", u64 limit, u64 count, u64 primes.
  static PrimeTable cached(std::uint64_t limit);

  void save(const std::filesystem::path& path) const;
  static PrimeTable load(const std::filesystem::path& path);

 private:
  struct PowerCache;
  void finish();

  std::uint64_t limit_ = 0;
  std::vector<std::uint64_t> primes_;
  std::vector<double> logs_;
  std::shared_ptr<PowerCache> powers_;
};

/// Free-function form of PrimeTable::sieve. Throws DomainError unless 3 <= X <= 1e8.
PrimeTable sieve(std::uint64_t X);

struct PolySpec {
  double sigma = 0.5;
  int m = 0;
  double theta = 0.0;
  std::uint64_t X = 3;
};

/// Throws DomainError unless 1/2 <= sigma < 1, m >= 0, X >= 2 and theta finite.
void validate(const PolySpec& spec);

/// Uniform grid t_j = T + j delta, j = 0..count-1, covering [T, 2T).
///
/// delta is the largest multiple of 2^-q (q fixed by the magnitude of 2T)
/// that does not exceed T/count, so every grid point is an exact double and
/// pointwise and incremental evaluation see the same abscissae.
struct TGrid {
  double T = 0.0;
  std::int64_t count = 0;
  double delta = 0.0;

  double at(std::int64_t j) const { return T + static_cast<double>(j) * delta; }

  /// count = ceil(T / delta_max) with delta_max = 2 pi / (3 log X).
  static TGrid covering(double T, std::uint64_t X);
  /// A grid with an explicit count.
  static TGrid with_count(double T, std::int64_t count);
  /// Same interval, twice as many points.
  TGrid refined() const { return with_count(T, 2 * count); }
};

/// Largest spacing that resolves the fastest oscillation of a polynomial of length X.
double max_grid_spacing(std::uint64_t X);

/// P(t) for one t; phases t log p are reduced in extended precision.
double poly_eval(const PolySpec& spec, const PrimeTable& table, double t);

/// Complex sum S(t) = sum_{p <= X} p^{-sigma-it} (log p)^{-m}; P = Re e^{-i theta} S.
cplx poly_eval_complex(const PolySpec& spec, const PrimeTable& table, double t);

/// A contiguous block of grid values of S(t_j), j = first .. first + re.size() - 1.
struct GridChunk {
  std::size_t index = 0;  // chunk number
  std::int64_t first = 0;
  std::span<const double> re;
  std::span<const double> im;
};

struct StreamConfig {
  std::int64_t chunk_points = 1 << 16;  // multiple of the reseed period
  int workers = 0;                      // 0: hardware concurrency
};

inline constexpr std::int64_t kReseedPeriod = 1024;

/// Evaluates S(t) on the whole grid chunk by chunk. The visitor may run on
/// worker threads, concurrently for distinct chunks; chunk boundaries and
/// values do not depend on the number of workers.
///
/// Each prime's phase advances by multiplication with e^{-i delta log p}
/// and is recomputed directly every kReseedPeriod grid steps.
void stream_poly(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                 const std::function<void(const GridChunk&)>& visit, const StreamConfig& cfg = {});

std::size_t chunk_count(const TGrid& grid, const StreamConfig& cfg = {});

/// P(t_j) for every grid point.
std::vector<double> poly_eval_batch(const PolySpec& spec, const PrimeTable& table,
                                    const TGrid& grid, const StreamConfig& cfg = {});

/// Fixed-shape pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// sum_{2 <= n <= X} Lambda(n) n^{-sigma-it} (log n)^{-m-1}.
cplx lambda_sum(int m, double sigma, std::uint64_t X, double t);
cplx lambda_sum(int m, double sigma, std::uint64_t X, double t, const PrimeTable& table);

/// |eta~_m(sigma+it) - lambda_sum(m, sigma, X, t)|.
double approximation_defect(int m, double sigma, std::uint64_t X, double t,
                            const QuadratureConfig& cfg = {});
double approximation_defect(int m, double sigma, std::uint64_t X, double t,
                            const PrimeTable& table, const QuadratureConfig& cfg = {});

/// Coefficient vector w_p = p^{-sigma} (log p)^{-m} for p <= spec.X.
std::vector<double> poly_weights(const PolySpec& spec, const PrimeTable& table);

}  // namespace zel
