#include "zel/cli_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

#include "zel/acceptance.hpp"
#include "zel/errors.hpp"
#include "zel/moments.hpp"
#include "zel/prime_poly.hpp"
#include "zel/tails.hpp"
#include "zel/zeta_core.hpp"

namespace zel {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw DomainError("not a finite number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<double> parse_v_grid(const std::string& text) {
  if (text.empty()) throw DomainError("empty V grid");
  if (text.find(':') != std::string::npos) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw DomainError("V grid must be start:stop:step");
    double a = parse_number(parts[0]), b = parse_number(parts[1]), step = parse_number(parts[2]);
    if (!(step > 0.0) || !(b >= a)) throw DomainError("V grid needs start <= stop and step > 0");
    // Inclusive of stop up to rounding in the step count.
    auto n = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 1'000'000) throw DomainError("V grid too long");
    std::vector<double> out;
    for (long i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_number(p));
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) throw DomainError("V list must be strictly ascending");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& p : split(text, ',')) {
    int v = 0;
    auto res = std::from_chars(p.data(), p.data() + p.size(), v);
    if (res.ec != std::errc() || res.ptr != p.data() + p.size() || v < 1) {
      throw DomainError("expected a positive integer, got '" + p + "'");
    }
    out.push_back(v);
  }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Output tables

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return csv_field(s); }
  } visitor;
  return std::visit(visitor, c);
}

json cell_json(const Cell& c) {
  struct {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(double v) const { return v; }
    json operator()(long long v) const { return v; }
    json operator()(bool v) const { return v; }
    json operator()(const std::string& s) const { return s; }
  } visitor;
  return std::visit(visitor, c);
}

void check_finite(const Table& t) {
  for (const auto& row : t.rows) {
    for (const auto& c : row) {
      if (const double* d = std::get_if<double>(&c); d && !std::isfinite(*d)) {
        throw NonFinite("non-finite value in output");
      }
    }
  }
}

struct Common {
  std::string format = "csv";
  std::string out_path;
  std::uint64_t seed = 0;
  int workers = 0;
};

void emit(const Common& common, const std::string& command, const json& config, const Table& table,
          std::ostream& out) {
  check_finite(table);
  std::ostringstream buf;
  if (common.format == "json") {
    json doc;
    doc["command"] = command;
    doc["config"] = config;
    json rows = json::array();
    for (const auto& row : table.rows) {
      json r;
      for (std::size_t i = 0; i < row.size(); ++i) r[table.header[i]] = cell_json(row[i]);
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    buf << doc.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < table.header.size(); ++i) buf << (i ? "," : "") << csv_field(table.header[i]);
    buf << "\r\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) buf << (i ? "," : "") << cell_text(row[i]);
      buf << "\r\n";
    }
  }
  if (common.out_path.empty() || common.out_path == "-") {
    out << buf.str();
  } else {
    std::ofstream f(common.out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + common.out_path);
    f << buf.str();
  }
}

json common_json(const Common& c) {
  return json{{"format", c.format}, {"seed", c.seed}};
}

Cell opt_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::monostate{}); }

// ---------------------------------------------------------------------------
// Subcommands

struct PredictArgs {
  std::string family;
  double sigma = 0.5;
  int m = 1;
  double theta = 0.0;
  std::optional<double> X, T;
  std::string V;
  RangeConstants constants;
};

Table cmd_predict(const PredictArgs& a) {
  const auto family = parse_tail_family(a.family);
  TailParams p;
  p.m = a.m;
  p.sigma = a.sigma;
  p.theta = a.theta;
  p.X = a.X;
  p.T = a.T;
  Table t;
  t.header = {"family", "V", "exponent", "error_window", "valid", "violations"};
  for (double V : parse_v_grid(a.V)) {
    auto pr = predict_tail(family, V, p, a.constants);
    std::string v;
    for (const auto& s : pr.violations) v += (v.empty() ? "" : ";") + s;
    t.rows.push_back({to_string(family), V, pr.exponent, pr.error_window, pr.valid, v});
  }
  return t;
}

struct MomentsArgs {
  double sigma = 0.5;
  int m = 1;
  double theta = 0.0;
  std::uint64_t X = 31;
  double T = 1e6;
  std::string k = "2";
  std::string methods = "all";
};

Table cmd_moments(const MomentsArgs& a, int workers) {
  PolySpec spec{a.sigma, a.m, a.theta, a.X};
  validate(spec);
  const auto ks = parse_int_list(a.k);
  std::vector<MomentMethod> methods;
  if (a.methods == "all") {
    methods = {MomentMethod::exact_multiplicative, MomentMethod::contour, MomentMethod::empirical};
  } else {
    for (const auto& name : split(a.methods, ',')) {
      if (name == "exact") methods.push_back(MomentMethod::exact_multiplicative);
      else if (name == "contour") methods.push_back(MomentMethod::contour);
      else if (name == "empirical") methods.push_back(MomentMethod::empirical);
      else throw DomainError("unknown moment method '" + name + "'");
    }
  }
  const auto table = PrimeTable::cached(std::max<std::uint64_t>(a.X, 3));
  std::map<std::pair<int, MomentMethod>, MomentResult> results;
  for (auto method : methods) {
    if (method == MomentMethod::empirical) {
      StreamConfig sc;
      sc.workers = workers;
      auto em = empirical_moments(spec, table, TGrid::covering(a.T, a.X), ks, true, sc);
      for (const auto& r : em) results[{r.k, method}] = r;
    } else {
      for (int k : ks) {
        results[{k, method}] = method == MomentMethod::contour ? contour_moment(spec, k, table)
                                                              : exact_moment(spec, k, table);
      }
    }
  }
  Table t;
  t.header = {"k", "method", "value", "err_estimate", "agreement", "sigma", "m", "theta", "X", "T"};
  for (int k : ks) {
    // Largest pairwise gap relative to the larger magnitude; empty for odd k,
    // where every route should be near zero and a relative gap is meaningless.
    std::optional<double> agreement;
    if (k % 2 == 0 && methods.size() > 1) {
      double gap = 0.0;
      for (auto m1 : methods) {
        for (auto m2 : methods) {
          double x = results[{k, m1}].value, y = results[{k, m2}].value;
          double scale = std::max(std::abs(x), std::abs(y));
          if (scale > 0.0) gap = std::max(gap, std::abs(x - y) / scale);
        }
      }
      agreement = gap;
    }
    for (auto method : methods) {
      const auto& r = results[{k, method}];
      t.rows.push_back({static_cast<long long>(k), to_string(method), r.value, r.err_estimate, opt_cell(agreement),
                        a.sigma, static_cast<long long>(a.m), a.theta, static_cast<long long>(a.X), a.T});
    }
  }
  return t;
}

struct TailArgs {
  std::string family = "poly";
  double sigma = 0.5;
  int m = 1;
  double theta = 0.0;
  std::uint64_t X = 1000;
  double T = 1e4;
  long long count = 0;
  std::string V;
  RangeConstants constants;
};

Table cmd_tail(const TailArgs& a, int workers, json& resolved) {
  const auto V_grid = parse_v_grid(a.V);
  ExceedanceCurve curve;
  TailFamily family;
  if (a.family == "poly") {
    PolySpec spec{a.sigma, a.m, a.theta, a.X};
    validate(spec);
    TGrid grid = a.count > 0 ? TGrid::with_count(a.T, a.count) : TGrid::covering(a.T, a.X);
    if (grid.delta > max_grid_spacing(a.X)) throw DomainError("tail: grid spacing exceeds 2 pi / (3 log X)");
    StreamConfig sc;
    sc.workers = workers;
    curve = measure_exceedance_poly(spec, PrimeTable::cached(std::max<std::uint64_t>(a.X, 3)), grid, V_grid, sc);
    family = a.sigma == 0.5 ? TailFamily::critical_poly : TailFamily::strip_poly;
  } else if (a.family == "eta") {
    if (a.count <= 0) throw DomainError("tail: the eta family needs an explicit --count (at most 1e5)");
    if (a.count > kEtaGridLimit) throw DomainError("tail: the eta family is limited to 1e5 grid points");
    curve = measure_exceedance_eta(a.m, a.sigma, a.theta, TGrid::with_count(a.T, a.count), V_grid);
    family = a.sigma == 0.5 ? TailFamily::critical_eta : TailFamily::strip_eta;
  } else {
    throw DomainError("tail: family must be poly or eta");
  }
  resolved["grid"] = json{{"T", curve.grid.T}, {"count", curve.grid.count}, {"delta", curve.grid.delta}};
  resolved["excluded"] = curve.excluded;
  resolved["flagged"] = curve.flagged;

  TailParams p;
  p.m = a.m;
  p.sigma = a.sigma;
  p.theta = a.theta;
  p.X = static_cast<double>(a.X);
  p.T = a.T;
  Table t;
  t.header = {"V", "count", "fraction", "predicted_exponent", "log_ratio", "validity_flags"};
  for (std::size_t i = 0; i < V_grid.size(); ++i) {
    Cell exponent, ratio;
    std::string flags = curve.below_resolution[i] ? "below_resolution" : "";
    try {
      auto pr = predict_tail(family, V_grid[i], p, a.constants);
      exponent = pr.exponent;
      if (curve.measure_fraction[i] > 0.0) ratio = log_ratio(curve.measure_fraction[i], pr.exponent);
      for (const auto& s : pr.violations) flags += (flags.empty() ? "" : ";") + s;
    } catch (const DomainError&) {
      flags += std::string(flags.empty() ? "" : ";") + "no_prediction";
    }
    t.rows.push_back({V_grid[i], static_cast<long long>(curve.exceed_counts[i]), curve.measure_fraction[i], exponent,
                      ratio, flags});
  }
  return t;
}

struct EtaArgs {
  int m = 1;
  double sigma = 0.5;
  std::string t = "20";
  bool with_s = false;
};

Table cmd_eta(const EtaArgs& a) {
  Table t;
  t.header = {"m", "sigma", "t", "re", "im", "quad_err", "tail_bound"};
  if (a.with_s) t.header.push_back("pi_S_m");
  for (const auto& s : split(a.t, ',')) {
    double tv = parse_number(s);
    auto r = eta_tilde_detailed(a.m, a.sigma, tv);
    std::vector<Cell> row{static_cast<long long>(a.m), a.sigma, tv, r.value.real(), r.value.imag(), r.quad_err,
                          r.tail_bound};
    if (a.with_s) row.push_back(std::numbers::pi * s_m(a.m, tv));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void add_constant_options(CLI::App* sub, RangeConstants& k) {
  for (int i = 1; i <= 6; ++i) {
    sub->add_option("--a" + std::to_string(i), k.a[i], "range constant a" + std::to_string(i))->capture_default_str();
    sub->add_option("--b" + std::to_string(i), k.b[i], "range constant b" + std::to_string(i))->capture_default_str();
  }
}

json constants_json(const RangeConstants& k) {
  json a = json::array(), b = json::array();
  for (int i = 1; i <= 6; ++i) {
    a.push_back(k.a[i]);
    b.push_back(k.b[i]);
  }
  return json{{"a", a}, {"b", b}};
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--out", c.out_path, "output file (default stdout)");
  sub->add_option("--seed", c.seed, "recorded for provenance; runs are deterministic")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads (0 = all cores); never changes results")
      ->check(CLI::NonNegativeNumber);
}

std::optional<double> opt(const CLI::Option* o, double v) {
  return o->count() > 0 ? std::optional<double>(v) : std::nullopt;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"zel: log zeta integrals, prime polynomial moments and tail measures"};
  app.require_subcommand(1);

  Common common;

  PredictArgs pa;
  double pX = 0, pT = 0;
  auto* predict = app.add_subcommand("predict", "predicted tail exponents over a V grid");
  predict->add_option("--family", pa.family, "critical_poly | critical_eta | strip_poly | strip_eta")->required();
  predict->add_option("--sigma", pa.sigma)->capture_default_str();
  predict->add_option("--m", pa.m)->capture_default_str();
  predict->add_option("--theta", pa.theta)->capture_default_str();
  auto* pXo = predict->add_option("--X", pX, "polynomial length");
  auto* pTo = predict->add_option("--T", pT, "height");
  predict->add_option("--V", pa.V, "start:stop:step, a comma list, or one value")->required();
  add_constant_options(predict, pa.constants);
  add_common(predict, common);

  MomentsArgs ma;
  double mX = 31;
  auto* moments = app.add_subcommand("moments", "moments of the prime polynomial by three routes");
  moments->add_option("--sigma", ma.sigma)->capture_default_str();
  moments->add_option("--m", ma.m)->capture_default_str();
  moments->add_option("--theta", ma.theta)->capture_default_str();
  moments->add_option("--X", mX)->capture_default_str();
  moments->add_option("--T", ma.T)->capture_default_str();
  moments->add_option("--k", ma.k, "comma list of moment orders")->capture_default_str();
  moments->add_option("--methods", ma.methods, "all or a comma list of exact, contour, empirical")
      ->capture_default_str();
  add_common(moments, common);

  TailArgs ta;
  double tX = 1000, tCount = 0;
  auto* tail = app.add_subcommand("tail", "empirical exceedance curve");
  tail->add_option("--family", ta.family, "poly or eta")->check(CLI::IsMember({"poly", "eta"}))->capture_default_str();
  tail->add_option("--sigma", ta.sigma)->capture_default_str();
  tail->add_option("--m", ta.m)->capture_default_str();
  tail->add_option("--theta", ta.theta)->capture_default_str();
  tail->add_option("--X", tX)->capture_default_str();
  tail->add_option("--T", ta.T)->capture_default_str();
  tail->add_option("--count", tCount, "grid points (default: smallest count meeting the spacing rule)");
  tail->add_option("--V", ta.V, "start:stop:step, a comma list, or one value")->required();
  add_constant_options(tail, ta.constants);
  add_common(tail, common);

  EtaArgs ea;
  auto* eta = app.add_subcommand("eta", "iterated horizontal integrals of log zeta");
  eta->add_option("--m", ea.m)->capture_default_str();
  eta->add_option("--sigma", ea.sigma)->capture_default_str();
  eta->add_option("--t", ea.t, "comma list of heights")->capture_default_str();
  eta->add_flag("--with-s", ea.with_s, "also report pi S_m(t) (sigma = 1/2 identity check)");
  add_common(eta, common);

  bool quick = false;
  std::string artifacts, only;
  auto* selfcheck = app.add_subcommand("selfcheck", "run the acceptance criteria");
  selfcheck->add_flag("--quick", quick, "skip the long tail sweep");
  selfcheck->add_option("--artifacts", artifacts, "directory for determinism artifacts");
  selfcheck->add_option("--only", only, "comma list of criterion numbers");
  selfcheck->add_option("--workers", common.workers)->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  auto integer_of = [](double v, const char* what) -> std::uint64_t {
    if (!(v >= 2.0 && v <= 1e18) || std::floor(v) != v) {
      throw DomainError(std::string(what) + " must be an integer >= 2");
    }
    return static_cast<std::uint64_t>(v);
  };

  try {
    if (*predict) {
      pa.X = opt(pXo, pX);
      pa.T = opt(pTo, pT);
      json cfg = common_json(common);
      cfg["family"] = pa.family;
      cfg["sigma"] = pa.sigma;
      cfg["m"] = pa.m;
      cfg["theta"] = pa.theta;
      cfg["X"] = pa.X ? json(*pa.X) : json(nullptr);
      cfg["T"] = pa.T ? json(*pa.T) : json(nullptr);
      cfg["V"] = pa.V;
      cfg["constants"] = constants_json(pa.constants);
      emit(common, "predict", cfg, cmd_predict(pa), out);
    } else if (*moments) {
      ma.X = integer_of(mX, "X");
      json cfg = common_json(common);
      cfg["sigma"] = ma.sigma;
      cfg["m"] = ma.m;
      cfg["theta"] = ma.theta;
      cfg["X"] = ma.X;
      cfg["T"] = ma.T;
      cfg["k"] = ma.k;
      cfg["methods"] = ma.methods;
      emit(common, "moments", cfg, cmd_moments(ma, common.workers), out);
    } else if (*tail) {
      ta.X = integer_of(tX, "X");
      if (tCount < 0 || std::floor(tCount) != tCount || tCount > 1e12) throw DomainError("--count must be a nonnegative integer");
      ta.count = static_cast<long long>(tCount);
      json cfg = common_json(common);
      cfg["family"] = ta.family;
      cfg["sigma"] = ta.sigma;
      cfg["m"] = ta.m;
      cfg["theta"] = ta.theta;
      cfg["X"] = ta.X;
      cfg["T"] = ta.T;
      cfg["V"] = ta.V;
      cfg["constants"] = constants_json(ta.constants);
      Table t = cmd_tail(ta, common.workers, cfg);
      emit(common, "tail", cfg, t, out);
    } else if (*eta) {
      json cfg = common_json(common);
      cfg["m"] = ea.m;
      cfg["sigma"] = ea.sigma;
      cfg["t"] = ea.t;
      cfg["with_s"] = ea.with_s;
      emit(common, "eta", cfg, cmd_eta(ea), out);
    } else if (*selfcheck) {
      AcceptanceConfig ac;
      ac.quick = quick;
      ac.workers = common.workers;
      if (!artifacts.empty()) ac.artifact_dir = artifacts;
      if (!only.empty()) ac.only = parse_int_list(only);
      bool all_pass = true;
      run_acceptance(ac, [&](const CriterionResult& r) {
        out << format_result_line(r) << '\n' << std::flush;
        if (!r.pass && !r.skipped) all_pass = false;
      });
      out << (all_pass ? "selfcheck: all criteria passed" : "selfcheck: FAILED") << '\n';
      return all_pass ? kExitOk : kExitFailure;
    }
  } catch (const NonFinite& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonFinite;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace zel
