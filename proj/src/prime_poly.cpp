#include "zel/prime_poly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "zel/errors.hpp"

namespace zel {

namespace {

constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

// cos and -sin of t log p with the product reduced in extended precision.
inline void unit_phase(long double t, long double log_p, double& c, double& s) {
  long double ph = std::fmod(t * log_p, kTwoPiL);
  double d = static_cast<double>(ph);
  c = std::cos(d);
  s = -std::sin(d);
}

std::vector<std::uint64_t> simple_sieve(std::uint64_t n) {
  std::vector<char> composite(n + 1, 0);
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = 1;
  }
  return out;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("PrimeTable: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

struct PrimeTable::PowerCache {
  std::mutex mu;
  std::map<double, std::shared_ptr<const std::vector<double>>> by_sigma;
};

void PrimeTable::finish() {
  logs_.resize(primes_.size());
  for (std::size_t i = 0; i < primes_.size(); ++i) logs_[i] = std::log(static_cast<double>(primes_[i]));
  powers_ = std::make_shared<PowerCache>();
}

std::size_t PrimeTable::count_upto(std::uint64_t x) const {
  return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
}

std::shared_ptr<const std::vector<double>> PrimeTable::inv_powers(double sigma) const {
  if (!powers_) throw std::logic_error("PrimeTable: empty table");
  std::lock_guard lock(powers_->mu);
  auto& slot = powers_->by_sigma[sigma];
  if (!slot) {
    auto v = std::make_shared<std::vector<double>>(primes_.size());
    for (std::size_t i = 0; i < primes_.size(); ++i) (*v)[i] = std::exp(-sigma * logs_[i]);
    slot = std::move(v);
  }
  return slot;
}

PrimeTable PrimeTable::sieve(std::uint64_t limit) {
  if (limit < 2 || limit > kMaxSieveLimit) {
    throw DomainError("sieve: limit must lie in [2, 1e8], got " + std::to_string(limit));
  }
  PrimeTable table;
  table.limit_ = limit;
  std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit)));
  while (root * root > limit) --root;
  while ((root + 1) * (root + 1) <= limit) ++root;
  const auto base = simple_sieve(root);

  // Segments over odd numbers only; index i stands for lo + 2i.
  table.primes_.push_back(2);
  constexpr std::uint64_t kSegment = 1 << 18;
  std::vector<char> mark(kSegment);
  for (std::uint64_t lo = 3; lo <= limit; lo += 2 * kSegment) {
    std::uint64_t hi = std::min(limit, lo + 2 * kSegment - 1);
    std::uint64_t n = (hi - lo) / 2 + 1;
    std::fill(mark.begin(), mark.begin() + n, 0);
    for (std::size_t b = 1; b < base.size(); ++b) {
      std::uint64_t p = base[b];
      std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
      if (start % 2 == 0) start += p;
      for (std::uint64_t j = start; j <= hi; j += 2 * p) mark[(j - lo) / 2] = 1;
    }
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!mark[i]) table.primes_.push_back(lo + 2 * i);
    }
  }
  table.finish();
  return table;
}

PrimeTable sieve(std::uint64_t X) {
  if (X < 3 || X > kMaxSieveLimit) {
    throw DomainError("sieve: X must lie in [3, 1e8], got " + std::to_string(X));
  }
  return PrimeTable::sieve(X);
}

void PrimeTable::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("PrimeTable: cannot write " + path.string());
  os.write("PTAB1", 5);
  put_u64(os, limit_);
  put_u64(os, primes_.size());
  for (auto p : primes_) put_u64(os, p);
}

PrimeTable PrimeTable::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("PrimeTable: cannot read " + path.string());
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, "PTAB1", 5) != 0) {
    throw std::runtime_error("PrimeTable: bad magic in " + path.string());
  }
  PrimeTable table;
  table.limit_ = get_u64(is);
  std::uint64_t count = get_u64(is);
  if (count > table.limit_) throw std::runtime_error("PrimeTable: corrupt count");
  table.primes_.resize(count);
  for (auto& p : table.primes_) p = get_u64(is);
  table.finish();
  return table;
}

PrimeTable PrimeTable::cached(std::uint64_t limit) {
  const char* dir = std::getenv("ZEL_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return sieve(limit);
  std::filesystem::path path = std::filesystem::path(dir) / ("ptab_" + std::to_string(limit) + ".bin");
  if (std::filesystem::exists(path)) {
    try {
      PrimeTable t = load(path);
      if (t.limit() == limit) return t;
    } catch (const std::exception&) {
      // fall through and regenerate
    }
  }
  PrimeTable t = sieve(limit);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  try {
    t.save(tmp);
    std::filesystem::rename(tmp, path, ec);
  } catch (const std::exception&) {
    // a cache that cannot be written is not an error
  }
  return t;
}

// ---------------------------------------------------------------------------

void validate(const PolySpec& spec) {
  if (!(spec.sigma >= 0.5 && spec.sigma < 1.0)) throw DomainError("PolySpec: sigma must lie in [1/2, 1)");
  if (spec.m < 0) throw DomainError("PolySpec: m must be nonnegative");
  if (spec.X < 2) throw DomainError("PolySpec: X must be >= 2");
  if (!std::isfinite(spec.theta)) throw DomainError("PolySpec: theta must be finite");
}

double max_grid_spacing(std::uint64_t X) {
  return 2.0 * std::numbers::pi / (3.0 * std::log(static_cast<double>(std::max<std::uint64_t>(X, 2))));
}

TGrid TGrid::with_count(double T, std::int64_t count) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("TGrid: T must be positive and finite");
  if (count < 1) throw DomainError("TGrid: count must be positive");
  // Quantum 2^-q with 2^(53-q) > 2T keeps T + j delta exact for j < count.
  int e = std::ilogb(2.0 * T) + 1;
  double quantum = std::ldexp(1.0, e - 52);
  TGrid g;
  g.T = std::round(T / quantum) * quantum;
  g.count = count;
  g.delta = std::floor(g.T / static_cast<double>(count) / quantum) * quantum;
  if (!(g.delta > 0.0)) throw DomainError("TGrid: count too large for T");
  return g;
}

TGrid TGrid::covering(double T, std::uint64_t X) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("TGrid: T must be positive and finite");
  auto count = static_cast<std::int64_t>(std::ceil(T / max_grid_spacing(X)));
  return with_count(T, count);
}

std::vector<double> poly_weights(const PolySpec& spec, const PrimeTable& table) {
  if (table.limit() < spec.X) throw DomainError("poly: prime table limit below X");
  const std::size_t n = table.count_upto(spec.X);
  auto inv = table.inv_powers(spec.sigma);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = (*inv)[i] * (spec.m == 0 ? 1.0 : std::pow(table.logs()[i], -spec.m));
  }
  return w;
}

cplx poly_eval_complex(const PolySpec& spec, const PrimeTable& table, double t) {
  validate(spec);
  const auto w = poly_weights(spec, table);
  const long double tl = t;
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double c, s;
    unit_phase(tl, std::log(static_cast<long double>(table.primes()[i])), c, s);
    re += w[i] * c;
    im += w[i] * s;
  }
  return {re, im};
}

double poly_eval(const PolySpec& spec, const PrimeTable& table, double t) {
  cplx s = poly_eval_complex(spec, table, t);
  return std::cos(spec.theta) * s.real() + std::sin(spec.theta) * s.imag();
}

// ---------------------------------------------------------------------------
// Streaming kernel

namespace {

struct KernelPrime {
  long double log_p;
  double w;
  double r_re, r_im;    // e^{-i delta log p}
  double r8_re, r8_im;  // its eighth power
};

std::vector<KernelPrime> kernel_primes(const PolySpec& spec, const PrimeTable& table, double delta) {
  const auto w = poly_weights(spec, table);
  std::vector<KernelPrime> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto& k = out[i];
    k.log_p = std::log(static_cast<long double>(table.primes()[i]));
    k.w = w[i];
    unit_phase(delta, k.log_p, k.r_re, k.r_im);
    unit_phase(8.0L * delta, k.log_p, k.r8_re, k.r8_im);
  }
  return out;
}

using v8 = double __attribute__((vector_size(64)));

inline v8 splat(double x) { return v8{x, x, x, x, x, x, x, x}; }

// Lane values w e^{-i t_{j+l} log p}, l = 0..7, seeded directly at t0.
inline void seed_lanes(const KernelPrime& k, long double t0, v8& vr, v8& vi) {
  double c, s;
  unit_phase(t0, k.log_p, c, s);
  double r = k.w * c, i = k.w * s;
  for (int l = 0; l < 8; ++l) {
    vr[l] = r;
    vi[l] = i;
    double nr = r * k.r_re - i * k.r_im;
    i = r * k.r_im + i * k.r_re;
    r = nr;
  }
}

inline void rotate(v8& vr, v8& vi, const v8& ar, const v8& ai) {
  v8 nr = vr * ar - vi * ai;
  vi = vr * ai + vi * ar;
  vr = nr;
}

// Accumulates S(t_j) for j in [first, first + len) into re/im (padded to 8).
// Four primes share each pass over the output window.
void kernel_chunk(const std::vector<KernelPrime>& primes, const TGrid& grid, std::int64_t first,
                  std::int64_t len, double* re, double* im) {
  constexpr std::size_t kGroup = 4;
  for (std::int64_t w0 = 0; w0 < len; w0 += kReseedPeriod) {
    const std::int64_t wl = std::min<std::int64_t>(kReseedPeriod, len - w0);
    const std::int64_t blocks = (wl + 7) / 8;
    double* ore = re + w0;
    double* oim = im + w0;
    const long double t0 = grid.at(first + w0);
    std::size_t i = 0;
    for (; i + kGroup <= primes.size(); i += kGroup) {
      v8 vr[kGroup], vi[kGroup], ar[kGroup], ai[kGroup];
      for (std::size_t g = 0; g < kGroup; ++g) {
        seed_lanes(primes[i + g], t0, vr[g], vi[g]);
        ar[g] = splat(primes[i + g].r8_re);
        ai[g] = splat(primes[i + g].r8_im);
      }
      for (std::int64_t b = 0; b < blocks; ++b) {
        v8 sr, si;
        std::memcpy(&sr, ore + 8 * b, sizeof sr);
        std::memcpy(&si, oim + 8 * b, sizeof si);
        for (std::size_t g = 0; g < kGroup; ++g) {
          sr += vr[g];
          si += vi[g];
          rotate(vr[g], vi[g], ar[g], ai[g]);
        }
        std::memcpy(ore + 8 * b, &sr, sizeof sr);
        std::memcpy(oim + 8 * b, &si, sizeof si);
      }
    }
    for (; i < primes.size(); ++i) {
      v8 vr, vi;
      seed_lanes(primes[i], t0, vr, vi);
      const v8 ar = splat(primes[i].r8_re), ai = splat(primes[i].r8_im);
      for (std::int64_t b = 0; b < blocks; ++b) {
        v8 sr, si;
        std::memcpy(&sr, ore + 8 * b, sizeof sr);
        std::memcpy(&si, oim + 8 * b, sizeof si);
        sr += vr;
        si += vi;
        rotate(vr, vi, ar, ai);
        std::memcpy(ore + 8 * b, &sr, sizeof sr);
        std::memcpy(oim + 8 * b, &si, sizeof si);
      }
    }
  }
}

}  // namespace

std::size_t chunk_count(const TGrid& grid, const StreamConfig& cfg) {
  return static_cast<std::size_t>((grid.count + cfg.chunk_points - 1) / cfg.chunk_points);
}

void stream_poly(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                 const std::function<void(const GridChunk&)>& visit, const StreamConfig& cfg) {
  validate(spec);
  if (cfg.chunk_points <= 0 || cfg.chunk_points % kReseedPeriod != 0) {
    throw DomainError("stream_poly: chunk_points must be a positive multiple of the reseed period");
  }
  const auto primes = kernel_primes(spec, table, grid.delta);
  const std::size_t chunks = chunk_count(grid, cfg);
  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    std::vector<double> re(cfg.chunk_points + 8), im(cfg.chunk_points + 8);
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      {
        std::lock_guard lock(failure_mu);
        if (failure) return;
      }
      const std::int64_t first = static_cast<std::int64_t>(c) * cfg.chunk_points;
      const std::int64_t len = std::min(cfg.chunk_points, grid.count - first);
      std::fill(re.begin(), re.end(), 0.0);
      std::fill(im.begin(), im.end(), 0.0);
      try {
        kernel_chunk(primes, grid, first, len, re.data(), im.data());
        GridChunk chunk{c, first, std::span<const double>(re.data(), len),
                        std::span<const double>(im.data(), len)};
        visit(chunk);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> poly_eval_batch(const PolySpec& spec, const PrimeTable& table, const TGrid& grid,
                                    const StreamConfig& cfg) {
  std::vector<double> out(static_cast<std::size_t>(grid.count));
  const double ct = std::cos(spec.theta), st = std::sin(spec.theta);
  stream_poly(
      spec, table, grid,
      [&](const GridChunk& c) {
        for (std::size_t i = 0; i < c.re.size(); ++i) out[c.first + i] = ct * c.re[i] + st * c.im[i];
      },
      cfg);
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// ---------------------------------------------------------------------------

cplx lambda_sum(int m, double sigma, std::uint64_t X, double t, const PrimeTable& table) {
  if (X < 3) throw DomainError("lambda_sum: X must be >= 3");
  if (m < 0) throw DomainError("lambda_sum: m must be nonnegative");
  if (table.limit() < X) throw DomainError("lambda_sum: prime table limit below X");
  const std::size_t n = table.count_upto(X);
  const long double tl = t;
  double re = 0.0, im = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const std::uint64_t p = table.primes()[i];
    const long double lp = std::log(static_cast<long double>(p));
    std::uint64_t q = p;
    for (int k = 1;; ++k) {
      const double ln = static_cast<double>(k * lp);
      double c, s;
      unit_phase(tl, k * lp, c, s);
      const double mag = static_cast<double>(lp) * std::exp(-sigma * ln) * std::pow(ln, -(m + 1));
      re += mag * c;
      im += mag * s;
      if (q > X / p) break;
      q *= p;
    }
  }
  return {re, im};
}

cplx lambda_sum(int m, double sigma, std::uint64_t X, double t) {
  if (X < 3) throw DomainError("lambda_sum: X must be >= 3");
  return lambda_sum(m, sigma, X, t, PrimeTable::cached(X));
}

double approximation_defect(int m, double sigma, std::uint64_t X, double t, const PrimeTable& table,
                            const QuadratureConfig& cfg) {
  cplx eta = eta_tilde(m, sigma, t, cfg);
  return std::abs(eta - lambda_sum(m, sigma, X, t, table));
}

double approximation_defect(int m, double sigma, std::uint64_t X, double t, const QuadratureConfig& cfg) {
  if (X < 3) throw DomainError("approximation_defect: X must be >= 3");
  return approximation_defect(m, sigma, X, t, PrimeTable::cached(X), cfg);
}

}  // namespace zel
