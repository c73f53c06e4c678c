#include "zel/zeta_core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "zel/errors.hpp"
#include "zel/quadrature.hpp"

namespace zel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxEmTerms = 40;

// B_{2k} / (2k)! for k = 1..kMaxEmTerms, from B_{2k}/(2k)! = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}.
const std::array<double, kMaxEmTerms + 1>& bernoulli_ratios() {
  static const auto table = [] {
    std::array<double, kMaxEmTerms + 1> r{};
    for (int k = 1; k <= kMaxEmTerms; ++k) {
      double z2k;
      if (k == 1) {
        z2k = kPi * kPi / 6.0;
      } else {
        long double s = 0.0L;
        const int cut = 1000;
        for (int n = cut; n >= 1; --n) s += std::pow(static_cast<long double>(n), -2.0L * k);
        s += std::pow(static_cast<long double>(cut), 1.0L - 2.0L * k) / (2.0L * k - 1.0L);
        s -= 0.5L * std::pow(static_cast<long double>(cut), -2.0L * k);
        z2k = static_cast<double>(s);
      }
      double sign = (k % 2 == 1) ? 1.0 : -1.0;
      r[k] = sign * 2.0 * z2k * std::exp(-2.0 * k * std::log(2.0 * kPi));
    }
    return r;
  }();
  return table;
}

// t log n reduced modulo 2 pi in extended precision.
double reduced_phase(double t, long double log_n) {
  constexpr long double two_pi = 6.283185307179586476925286766559005768L;
  long double ph = static_cast<long double>(t) * log_n;
  ph = std::fmod(ph, two_pi);
  return static_cast<double>(ph);
}

int em_cut_point(double t, double max_sigma) {
  double mag = std::hypot(std::max(std::abs(max_sigma), 1.0), t);
  return 10 + static_cast<int>(std::ceil(mag / kPi));
}

}  // namespace

ZetaLine::ZetaLine(double t, double max_sigma) : t_(t), n_(em_cut_point(t, max_sigma)) {
  log_n_.resize(n_ + 1);
  cos_n_.resize(n_ + 1);
  sin_n_.resize(n_ + 1);
  for (int n = 1; n <= n_; ++n) {
    long double ln = std::log(static_cast<long double>(n));
    log_n_[n] = static_cast<double>(ln);
    double ph = reduced_phase(t, ln);
    cos_n_[n] = std::cos(ph);
    sin_n_[n] = std::sin(ph);
  }
}

ZetaResult ZetaLine::operator()(double sigma) const {
  const cplx s(sigma, t_);
  if (sigma == 1.0 && t_ == 0.0) throw DomainError("zeta: pole at s = 1");

  double re = 0.0, im = 0.0;
  for (int n = n_ - 1; n >= 1; --n) {
    double mag = std::exp(-sigma * log_n_[n]);
    re += mag * cos_n_[n];
    im -= mag * sin_n_[n];
  }
  cplx sum(re, im);

  const double big_n = n_;
  const double mag_n = std::exp(-sigma * log_n_[n_]);
  const cplx n_pow(mag_n * cos_n_[n_], -mag_n * sin_n_[n_]);  // N^{-s}
  sum += big_n * n_pow / (s - 1.0);
  sum += 0.5 * n_pow;

  const auto& br = bernoulli_ratios();
  // T_k = B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
  cplx rising = s;
  cplx npow = n_pow / big_n;
  const double inv_n2 = 1.0 / (big_n * big_n);
  double last = 0.0;
  double prev_mag = HUGE_VAL;
  for (int k = 1; k <= kMaxEmTerms; ++k) {
    cplx term = br[k] * rising * npow;
    double mag = std::abs(term);
    if (mag > prev_mag) break;  // asymptotic: past the smallest term
    sum += term;
    last = mag;
    prev_mag = mag;
    if (mag <= 1e-17 * std::abs(sum)) break;
    rising *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
    npow *= inv_n2;
  }
  ZetaResult out;
  out.value = sum;
  out.err_estimate = last;
  out.target_met = last <= 1e-12 * std::abs(sum);
  return out;
}

ZetaResult zeta_checked(cplx s) {
  if (s == cplx(1.0, 0.0)) throw DomainError("zeta: pole at s = 1");
  if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw DomainError("zeta: non-finite argument");
  return ZetaLine(s.imag(), s.real())(s.real());
}

cplx zeta(cplx s) { return zeta_checked(s).value; }

void validate(const QuadratureConfig& cfg) {
  if (!(cfg.alpha_split >= 2.0)) throw DomainError("QuadratureConfig: alpha_split must be >= 2");
  if (cfg.tail_terms < 16) throw DomainError("QuadratureConfig: tail_terms must be >= 16");
  if (!(cfg.panel_rel_tol > 0.0)) throw DomainError("QuadratureConfig: panel_rel_tol must be positive");
  if (cfg.max_subdivisions < 1) throw DomainError("QuadratureConfig: max_subdivisions must be positive");
}

// ---------------------------------------------------------------------------
// Branch continuation

namespace {

constexpr double kOriginSigma = 10.0;

double max_step(double alpha) {
  if (alpha > 3.0) return 1.0;
  if (alpha > 1.5) return 0.25;
  return 0.1;
}

}  // namespace

LogZetaLine::LogZetaLine(double t, const QuadratureConfig& cfg) : cfg_(cfg), zeta_(t, kOriginSigma) {
  validate(cfg_);
  // For sigma >= 2, |zeta - 1| <= zeta(2) - 1 < 1, so the principal log is on the branch.
  cplx z = zeta_(kOriginSigma).value;
  anchors_.emplace(kOriginSigma, Anchor{std::log(z), z});
}

cplx LogZetaLine::step_to(double from, const Anchor& start, double target, cplx& zeta_out) {
  double alpha = from;
  cplx log_value = start.log_value;
  cplx z_prev = start.zeta_value;
  const double dir = target < alpha ? -1.0 : 1.0;
  double h = max_step(alpha);
  while (alpha != target) {
    int depth = 0;
    for (;;) {
      double next = alpha + dir * h;
      if ((dir < 0 && next <= target) || (dir > 0 && next >= target)) next = target;
      cplx z = zeta_(next).value;
      if (!(std::abs(z) > 1e-300) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw NearZeroOnPath(next, t());
      }
      cplx ratio = z / z_prev;
      double darg = std::arg(ratio);
      double dlog = std::log(std::abs(z)) - std::log(std::abs(z_prev));
      if (std::abs(darg) <= 0.25 * kPi && std::abs(dlog) <= 1.0) {
        log_value = cplx(std::log(std::abs(z)), log_value.imag() + darg);
        z_prev = z;
        alpha = next;
        h = std::min(2.0 * h, max_step(alpha));
        break;
      }
      h *= 0.5;
      // Depth is counted from the largest allowed step, so a path that creeps
      // up to a zero through many short accepted steps is caught as well.
      if (++depth > cfg_.max_subdivisions || h < std::ldexp(max_step(alpha), -cfg_.max_subdivisions)) {
        throw NearZeroOnPath(next, t());
      }
    }
  }
  zeta_out = z_prev;
  return log_value;
}

BranchedLog LogZetaLine::at(double sigma) {
  if (!std::isfinite(sigma)) throw DomainError("log_zeta_branched: non-finite sigma");
  BranchedLog out;
  out.path_origin_sigma = std::max(kOriginSigma, sigma);
  cplx z;
  if (sigma >= 2.0 && sigma >= kOriginSigma) {
    z = zeta_(sigma).value;
    out.value = std::log(z);
  } else if (auto it = anchors_.find(sigma); it != anchors_.end()) {
    out.value = it->second.log_value;
    z = it->second.zeta_value;
  } else {
    // Nearest anchor on either side; the segment between them is zero-free
    // or the stepping flags it.
    auto hi = anchors_.lower_bound(sigma);
    auto best = hi;
    if (hi == anchors_.end() || (hi != anchors_.begin() &&
                                 sigma - std::prev(hi)->first < hi->first - sigma)) {
      best = std::prev(hi);
    }
    out.value = step_to(best->first, best->second, sigma, z);
    anchors_.emplace(sigma, Anchor{out.value, z});
  }
  out.unwind_count = std::lround((out.value.imag() - std::arg(z)) / (2.0 * kPi));
  return out;
}

BranchedLog log_zeta_branched(double sigma, double t, const QuadratureConfig& cfg) {
  LogZetaLine line(t, cfg);
  return line.at(sigma);
}

// ---------------------------------------------------------------------------
// Horizontal integrals

namespace {

// von Mangoldt Lambda(n) for n <= limit.
std::vector<double> mangoldt_table(int limit) {
  std::vector<double> lam(limit + 1, 0.0);
  std::vector<int> spf(limit + 1, 0);
  for (int i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      for (long long j = i; j <= limit; j += i) {
        if (spf[j] == 0) spf[j] = i;
      }
    }
  }
  for (int n = 2; n <= limit; ++n) {
    int p = spf[n];
    int r = n;
    while (r % p == 0) r /= p;
    if (r == 1) lam[n] = std::log(static_cast<double>(p));
  }
  return lam;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

struct TailSum {
  cplx value;
  double bound;
  int terms;
};

// (1/(m-1)!) int_A^inf (alpha - sigma)^{m-1} sum_n Lambda(n)/log n n^{-alpha-it} d alpha
// termwise: Lambda(n)/L n^{-A-it} sum_{j<m} (A-sigma)^j / (j! L^{m-j}), L = log n.
TailSum dirichlet_tail(int m, double sigma, double t, double a, int n_max) {
  auto coeff_bound = [&](double log_n) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::pow(a - sigma, j) / (factorial(j) * std::pow(log_n, m - j));
    return s;
  };
  auto remainder = [&](int n) {
    return coeff_bound(std::log(static_cast<double>(n))) * std::pow(n, 1.0 - a) / (a - 1.0);
  };
  while (remainder(n_max) > 1e-15 && n_max < (1 << 22)) n_max *= 2;

  const auto lam = mangoldt_table(n_max);
  cplx sum(0.0, 0.0);
  for (int n = n_max; n >= 2; --n) {
    if (lam[n] == 0.0) continue;
    long double ln_l = std::log(static_cast<long double>(n));
    double ln = static_cast<double>(ln_l);
    double poly = 0.0;
    for (int j = 0; j < m; ++j) poly += std::pow(a - sigma, j) / (factorial(j) * std::pow(ln, m - j));
    double mag = lam[n] / ln * std::exp(-a * ln) * poly;
    double ph = reduced_phase(t, ln_l);
    sum += cplx(mag * std::cos(ph), -mag * std::sin(ph));
  }
  return {sum, remainder(n_max), n_max};
}

std::vector<double> horizontal_breaks(double lo, double hi) {
  std::vector<double> b{lo};
  for (double step : {0.125, 0.25, 0.5, 1.0}) {
    if (lo + step < hi) b.push_back(lo + step);
  }
  for (double x = std::floor(lo) + 2.0; x < hi; x += 1.0) {
    if (x > b.back()) b.push_back(x);
  }
  b.push_back(hi);
  return b;
}

}  // namespace

EtaResult eta_tilde_detailed(int m, double sigma, double t, const QuadratureConfig& cfg) {
  if (m < 1) throw DomainError("eta_tilde: m must be >= 1 (use log_zeta_branched for m = 0)");
  if (!std::isfinite(sigma) || !std::isfinite(t)) throw DomainError("eta_tilde: non-finite argument");
  validate(cfg);
  const double a = std::max(cfg.alpha_split, sigma);
  const double norm = 1.0 / factorial(m - 1);

  EtaResult out;
  if (a > sigma) {
    LogZetaLine line(t, cfg);
    auto integrand = [&](double alpha) {
      return norm * std::pow(alpha - sigma, m - 1) * line.at(alpha).value;
    };
    auto q = integrate_adaptive_partition<cplx>(integrand, horizontal_breaks(sigma, a), 1e-14,
                                                cfg.panel_rel_tol);
    out.value = q.value;
    out.quad_err = q.err_estimate;
  }
  auto tail = dirichlet_tail(m, sigma, t, a, cfg.tail_terms);
  out.value += tail.value;
  out.tail_bound = tail.bound;
  out.tail_terms = tail.terms;
  return out;
}

cplx eta_tilde(int m, double sigma, double t, const QuadratureConfig& cfg) {
  return eta_tilde_detailed(m, sigma, t, cfg).value;
}

namespace {

// int_0^b w^j log w dw
double int_power_log(int j, double b) {
  if (b <= 0.0) return 0.0;
  double jp = j + 1.0;
  return std::pow(b, jp) * (std::log(b) / jp - 1.0 / (jp * jp));
}

cplx i_power(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

cplx c_constant(int m, double sigma, const QuadratureConfig& cfg) {
  if (m < 1) throw DomainError("c_constant: m must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("c_constant: sigma must be positive");
  validate(cfg);
  const double a = std::max(cfg.alpha_split, sigma);
  const double norm = 1.0 / factorial(m - 1);
  cplx integral(0.0, 0.0);

  if (a > sigma) {
    // log|zeta(alpha)| = h(alpha) - log|alpha - 1| with h = log((alpha-1) zeta(alpha)) smooth.
    ZetaLine line(0.0, a);
    auto smooth = [&](double alpha) {
      double z = line(alpha).value.real();
      return std::pow(alpha - sigma, m - 1) * std::log((alpha - 1.0) * z);
    };
    auto breaks = horizontal_breaks(sigma, a);
    if (sigma < 1.0 && 1.0 < a) {
      breaks.push_back(1.0);
      std::sort(breaks.begin(), breaks.end());
      breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    }
    auto q = integrate_adaptive_partition<double>(smooth, breaks, 1e-15, cfg.panel_rel_tol);

    // Closed form for int_sigma^a (alpha - sigma)^{m-1} log|alpha - 1|.
    const double c = 1.0 - sigma;
    double sing = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= m - 1; ++j) {
      if (j > 0) binom = binom * (m - j) / j;
      double jj = int_power_log(j, a - 1.0);
      if (sigma < 1.0) {
        jj += ((j % 2 == 0) ? 1.0 : -1.0) * int_power_log(j, 1.0 - sigma);
      } else {
        jj -= int_power_log(j, sigma - 1.0);
      }
      sing += binom * std::pow(c, m - 1 - j) * jj;
    }
    double imag = sigma < 1.0 ? -kPi * std::pow(1.0 - sigma, m) / m : 0.0;
    integral = norm * cplx(q.value - sing, imag);
  }
  integral += dirichlet_tail(m, sigma, 0.0, a, cfg.tail_terms).value;
  return i_power(m) * integral;
}

double b_constant(int m, const QuadratureConfig& cfg) {
  return c_constant(m, 0.5, cfg).imag() / kPi;
}

// ---------------------------------------------------------------------------
// Vertical integrals

namespace {

double s0_value(double u, const QuadratureConfig& cfg) {
  return log_zeta_branched(0.5, u, cfg).value.imag() / kPi;
}

// S_0 jumps by a positive integer at ordinates of zeros and is smooth between.
void locate_jumps(double a, double sa, double b, double sb, const QuadratureConfig& cfg,
                  std::vector<double>& out) {
  if (std::lround(sb - sa) == 0) return;
  if (b - a < 1e-10) {
    out.push_back(0.5 * (a + b));
    return;
  }
  double mid = 0.5 * (a + b);
  double sm;
  try {
    sm = s0_value(mid, cfg);
  } catch (const NearZeroOnPath&) {
    out.push_back(mid);
    return;
  }
  locate_jumps(a, sa, mid, sm, cfg, out);
  locate_jumps(mid, sm, b, sb, cfg, out);
}

}  // namespace

SmResult s_m_detailed(int m, double t, const QuadratureConfig& cfg) {
  if (m < 0) throw DomainError("s_m: m must be nonnegative");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("s_m: t must be finite and >= 0");
  validate(cfg);
  SmResult out;
  if (m == 0) {
    out.value = s0_value(t, cfg);
    return out;
  }

  // Cauchy's repeated-integration formula:
  // S_m(t) = sum_{j=1}^m b_j t^{m-j}/(m-j)! + (1/(m-1)!) int_0^t (t-u)^{m-1} S_0(u) du.
  double value = 0.0;
  for (int j = 1; j <= m; ++j) value += b_constant(j, cfg) * std::pow(t, m - j) / factorial(m - j);
  if (t == 0.0) {
    out.value = value;
    return out;
  }

  std::vector<double> samples;
  const double h0 = 0.05;
  double prev_u = 0.0;
  double prev_s = 0.0;
  bool have_prev = false;
  for (double u = h0; ; u += h0) {
    double uu = std::min(u, t);
    double su = s0_value(uu, cfg);
    if (have_prev) locate_jumps(prev_u, prev_s, uu, su, cfg, out.jumps);
    prev_u = uu;
    prev_s = su;
    have_prev = true;
    if (uu >= t) break;
  }

  std::vector<double> breaks{0.0};
  for (double j : out.jumps) {
    if (j > breaks.back() && j < t) breaks.push_back(j);
  }
  breaks.push_back(t);
  const double norm = 1.0 / factorial(m - 1);
  auto integrand = [&](double u) { return norm * std::pow(t - u, m - 1) * s0_value(u, cfg); };
  auto q = integrate_adaptive_partition<double>(integrand, breaks, 1e-10, 1e-12);
  out.value = value + q.value;
  out.err_estimate = q.err_estimate;
  return out;
}

double s_m(int m, double t, const QuadratureConfig& cfg) { return s_m_detailed(m, t, cfg).value; }

// ---------------------------------------------------------------------------
// Zeta cache

namespace {

constexpr char kZetaMagic[5] = {'Z', 'G', 'R', 'D', '1'};

void put_f64(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

bool get_f64(std::istream& is, double& v) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

ZetaCache::ZetaCache(ZetaCache&& other) noexcept {
  std::lock_guard lock(other.mu_);
  table_ = std::move(other.table_);
}

ZetaCache& ZetaCache::operator=(ZetaCache&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    table_ = std::move(other.table_);
  }
  return *this;
}

ZetaCache::Key ZetaCache::key(double sigma, double t) {
  return {std::bit_cast<std::uint64_t>(sigma), std::bit_cast<std::uint64_t>(t)};
}

cplx ZetaCache::get_or_compute(double sigma, double t) {
  if (auto hit = find(sigma, t)) return *hit;
  cplx z = zeta(cplx(sigma, t));
  insert(sigma, t, z);
  return z;
}

std::optional<cplx> ZetaCache::find(double sigma, double t) const {
  std::lock_guard lock(mu_);
  auto it = table_.find(key(sigma, t));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

void ZetaCache::insert(double sigma, double t, cplx value) {
  std::lock_guard lock(mu_);
  table_[key(sigma, t)] = value;
}

std::size_t ZetaCache::size() const {
  std::lock_guard lock(mu_);
  return table_.size();
}

void ZetaCache::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("ZetaCache: cannot write " + path.string());
  os.write(kZetaMagic, sizeof kZetaMagic);
  for (const auto& [k, v] : table_) {
    put_f64(os, std::bit_cast<double>(k.first));
    put_f64(os, std::bit_cast<double>(k.second));
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
}

ZetaCache ZetaCache::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ZetaCache: cannot read " + path.string());
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, kZetaMagic, 5) != 0) {
    throw std::runtime_error("ZetaCache: bad magic in " + path.string());
  }
  ZetaCache cache;
  double rec[4];
  for (;;) {
    if (!get_f64(is, rec[0])) break;
    for (int i = 1; i < 4; ++i) {
      if (!get_f64(is, rec[i])) throw std::runtime_error("ZetaCache: truncated record");
    }
    cache.table_[key(rec[0], rec[1])] = cplx(rec[2], rec[3]);
  }
  return cache;
}

}  // namespace zel
