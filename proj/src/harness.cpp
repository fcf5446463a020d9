#include "horodrift/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "horodrift/brownian.hpp"
#include "horodrift/error.hpp"
#include "horodrift/group_walks.hpp"
#include "horodrift/horofield.hpp"
#include "horodrift/parallel.hpp"
#include "horodrift/quadrature.hpp"

namespace horodrift::harness {

namespace {

using estimators::EstimateWithCI;
using estimators::InvariantSet;
using geometry::ModelSpace;
using geometry::Point;

constexpr double kPi = std::numbers::pi;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_group_id(const std::string& id) {
  return id.substr(0, 2) == "z:" || id.substr(0, 5) == "free:";
}

const std::set<std::string> kQuantities = {"drift",  "entropy",        "lm_km",
                                           "volume_entropy", "lambda", "cesaro",
                                           "group_report",   "check"};

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error("parse_error",
                  "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    try {
      if (key == "space")
        cfg.space = val;
      else if (key == "quantity")
        cfg.quantity = val;
      else if (key == "T")
        cfg.T = std::stod(val);
      else if (key == "dt")
        cfg.dt = std::stod(val);
      else if (key == "paths")
        cfg.paths = std::stoll(val);
      else if (key == "seed")
        cfg.seed = std::stoull(val);
      else if (key == "horofunction")
        cfg.horofunction = val;
      else if (key == "out")
        cfg.out = val;
      else if (key == "format")
        cfg.format = val;
      else if (key == "threads")
        cfg.threads = std::stoi(val);
      else
        throw Error("parse_error",
                    "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error("parse_error", "config line " + std::to_string(lineno) +
                                     ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (!(T > 0.0)) throw Error("parse_error", "T must be positive");
  if (!(dt > 0.0)) throw Error("parse_error", "dt must be positive");
  if (paths <= 0) throw Error("parse_error", "paths must be positive");
  if (!quantity.empty() && !kQuantities.count(quantity))
    throw Error("parse_error", "unknown quantity '" + quantity + "'");
  if (!space.empty() && !is_group_id(space))
    (void)ModelSpace::parse(space);  // throws unknown_space
  if (!space.empty() && is_group_id(space))
    (void)group_walks::GroupSpec::parse(space);
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["space"] = space;
  j["quantity"] = quantity;
  j["T"] = T;
  j["dt"] = dt;
  j["paths"] = paths;
  j["seed"] = seed;
  if (!horofunction.empty()) j["horofunction"] = horofunction;
  return j;
}

nlohmann::json ResultRecord::to_json() const {
  nlohmann::json j;
  j["config"] = config;
  j["quantity"] = quantity;
  j["value"] = value;
  j["stderr"] = stderr_;
  j["n"] = n;
  j["method"] = method;
  j["wall_ms"] = wall_ms;
  j["ts"] = ts;
  j["version"] = version;
  return j;
}

ResultRecord ResultRecord::from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.config = j.at("config");
  r.quantity = j.at("quantity").get<std::string>();
  r.value = j.at("value").get<double>();
  r.stderr_ = j.at("stderr").get<double>();
  r.n = j.at("n").get<std::uint64_t>();
  r.method = j.at("method").get<std::string>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.ts = j.at("ts").get<std::string>();
  r.version = j.at("version").get<std::string>();
  return r;
}

ResultStore::ResultStore(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records_.push_back(ResultRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error("parse_error",
                  "store line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ResultStore::append(const ResultRecord& r) {
  records_.push_back(r);
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("parse_error", "cannot open store for append: " + path_);
  out << r.to_json().dump() << "\n";  // one record per line, keys sorted
  out.flush();
}

std::vector<const ResultRecord*> ResultStore::find(const nlohmann::json& config) const {
  std::vector<const ResultRecord*> out;
  for (const auto& r : records_)
    if (r.config == config) out.push_back(&r);
  return out;
}

// ---------------------------------------------------------------------------
// defaults
// ---------------------------------------------------------------------------

std::vector<double> default_R_grid(const ModelSpace& space) {
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      return {2, 4, 6, 8, 10};
    case ModelSpace::Kind::HalfPlane:
      return {10, 12, 14, 16, 18, 20};
    case ModelSpace::Kind::Product:
      return {4, 5, 6, 7, 8, 9, 10};
  }
  return {};
}

double default_lambda_R(const ModelSpace& space) { return space.is_flat() ? 50.0 : 40.0; }

std::vector<double> default_s_grid(const ModelSpace& space) {
  std::vector<double> s;
  if (space.is_flat()) {
    for (int i = 0; i < 25; ++i) s.push_back(0.02 + 0.02 * i);
    return s;
  }
  // the truncated minimizer sits a little below v/2 (the cutoff keeps the
  // Rayleigh quotient finite there), so scan [0.3 v, 1.2 v]
  const double v = space.known_volume_entropy();
  for (int i = 0; i < 19; ++i) s.push_back(v * (0.3 + 0.05 * i));
  return s;
}

std::string default_horofunction(const ModelSpace& space) {
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean: {
      std::string spec = "dir:1";
      for (int i = 1; i < space.dim(); ++i) spec += ",0";
      return spec;
    }
    case ModelSpace::Kind::HalfPlane:
      return "q:inf";
    case ModelSpace::Kind::Product: {
      auto factor = [](const ModelSpace& f) -> std::string {
        if (f.kind() == ModelSpace::Kind::HalfPlane) return "q:inf";
        std::string spec = "dir:1";
        for (int i = 1; i < f.dim(); ++i) spec += ",0";
        return spec;
      };
      // theta of the harmonic stratum: pi/4 for H2xH2, pi/2 when only the
      // right factor is hyperbolic
      double theta = 0.7853981633974483;
      const bool lh = space.left().kind() == ModelSpace::Kind::HalfPlane;
      const bool rh = space.right().kind() == ModelSpace::Kind::HalfPlane;
      if (!lh && rh) theta = 1.5707963267948966;
      if (lh && !rh) theta = 0.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", theta);
      return "prod:" + factor(space.left()) + "," + factor(space.right()) +
             ",theta=" + buf;
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// verdicts
// ---------------------------------------------------------------------------

InequalityVerdict make_verdict(std::string name, VerdictSide lhs, VerdictSide rhs) {
  InequalityVerdict v;
  v.name = std::move(name);
  v.lhs = lhs;
  v.rhs = rhs;
  v.slack = 3.0 * (lhs.stderr_ + rhs.stderr_) + lhs.bias + rhs.bias;
  const double diff = lhs.value - rhs.value;
  if (diff > v.slack)
    v.verdict = "violated";
  else if (std::abs(diff) <= v.slack)
    v.verdict = "equality-within-tolerance";
  else
    v.verdict = "consistent";
  return v;
}

std::vector<InequalityVerdict> inequality_verdicts(const ModelSpace& space,
                                                   const InvariantSet& inv, double T,
                                                   std::span<const double> R_grid) {
  const double b_ell = inv.ell.exact ? 0.0 : estimators::drift_bias_budget(space, T);
  const double b_h = inv.h.exact ? 0.0 : estimators::entropy_bias_budget(space, T);
  const double b_v = inv.v.exact ? 0.0 : estimators::volume_bias_budget(space, R_grid);

  const VerdictSide ell{inv.ell.value, inv.ell.stderr_, b_ell, inv.ell.exact};
  const VerdictSide h{inv.h.value, inv.h.stderr_, b_h, inv.h.exact};
  const VerdictSide v{inv.v.value, inv.v.stderr_, b_v, inv.v.exact};
  const VerdictSide lam4{4.0 * inv.lambda.value, 4.0 * inv.lambda.stderr_, 0.0, true};

  const VerdictSide ell2{ell.value * ell.value, 2.0 * std::abs(ell.value) * ell.stderr_,
                         2.0 * std::abs(ell.value) * ell.bias + ell.bias * ell.bias,
                         ell.exact};
  const VerdictSide v2{v.value * v.value, 2.0 * std::abs(v.value) * v.stderr_,
                       2.0 * std::abs(v.value) * v.bias + v.bias * v.bias, v.exact};
  const VerdictSide ellv{ell.value * v.value,
                         std::abs(ell.value) * v.stderr_ + std::abs(v.value) * ell.stderr_,
                         std::abs(ell.value) * v.bias + std::abs(v.value) * ell.bias +
                             ell.bias * v.bias,
                         ell.exact && v.exact};

  std::vector<InequalityVerdict> out;
  out.push_back(make_verdict("ell^2<=h", ell2, h));
  out.push_back(make_verdict("h<=ell*v", h, ellv));
  out.push_back(make_verdict("ell<=v", ell, v));
  out.push_back(make_verdict("4*lambda<=h", lam4, h));
  out.push_back(make_verdict("h<=v^2", h, v2));
  out.push_back(make_verdict("4*lambda<=v^2", lam4, v2));
  return out;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace {

brownian::Scheme scheme_for(const ModelSpace& space) {
  return space.is_flat() ? brownian::Scheme::Exact : brownian::Scheme::Euler;
}

std::vector<brownian::Path> simulate(const ExperimentConfig& cfg, const ModelSpace& space) {
  return brownian::sample_paths(space, space.basepoint(), cfg.T, scheme_for(space),
                                cfg.dt, cfg.seed, static_cast<std::size_t>(cfg.paths),
                                cfg.threads);
}

ResultRecord make_record(const ExperimentConfig& cfg, const std::string& quantity,
                         double value, double stderr_v, std::uint64_t n,
                         const std::string& method, double wall_ms) {
  ResultRecord r;
  r.config = cfg.echo();
  r.quantity = quantity;
  r.value = value;
  r.stderr_ = stderr_v;
  r.n = n;
  r.method = method;
  r.wall_ms = wall_ms;
  r.ts = now_iso8601();
  return r;
}

}  // namespace

CheckResult run_check(const ExperimentConfig& cfg) {
  const ModelSpace space = ModelSpace::parse(cfg.space);
  CheckResult out;
  auto paths = simulate(cfg, space);
  auto drift = estimators::estimate_drift(space, paths, cfg.threads);
  auto entropy = estimators::estimate_entropy(space, paths, cfg.threads);
  const auto R_grid = default_R_grid(space);
  auto vol = estimators::estimate_volume_entropy(space, R_grid, 400000,
                                                 derive_seed(cfg.seed, 0x701));
  out.invariants.ell = drift.est;
  out.invariants.h = entropy;
  out.invariants.v = vol;
  out.invariants.lambda = {space.known_lambda(), 0.0, 0, 0.0, "closed-form", true};
  out.verdicts = inequality_verdicts(space, out.invariants, cfg.T, R_grid);
  return out;
}

RunOutcome run(const ExperimentConfig& cfg, ResultStore* store) {
  cfg.validate();
  if (cfg.quantity.empty()) throw Error("parse_error", "quantity is required");
  if (cfg.space.empty()) throw Error("parse_error", "space is required");

  if (store) {
    auto hits = store->find(cfg.echo());
    if (!hits.empty()) {
      RunOutcome out;
      out.cached = true;
      for (const auto* r : hits) out.records.push_back(*r);
      return out;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t0)
        .count();
  };

  RunOutcome out;
  auto emit = [&](const std::string& q, double value, double se, std::uint64_t n,
                  const std::string& method) {
    out.records.push_back(make_record(cfg, q, value, se, n, method, elapsed_ms()));
  };

  if (cfg.quantity == "group_report") {
    if (!is_group_id(cfg.space))
      throw Error("unknown_group", "group_report needs a group id (z:<d>, free:<k>)");
    const auto g = group_walks::GroupSpec::parse(cfg.space);
    std::vector<group_walks::GroupSpec> gs{g};
    const auto rows = group_walks::drift_entropy_report(gs);
    const auto& row = rows.front();
    const auto n = static_cast<std::uint64_t>(row.n_max);
    emit("word_drift", row.drift, 0.0, n, "exact-convolution");
    emit("word_drift_limit", row.drift_limit, 0.0, n, "richardson");
    emit("word_entropy_ub", row.entropy_ub, 0.0, n, "exact-convolution");
    emit("word_entropy_limit", row.entropy_limit, 0.0, n, "richardson");
  } else if (is_group_id(cfg.space)) {
    throw Error("unknown_space", "group ids only support quantity=group_report");
  } else if (cfg.quantity == "drift") {
    const ModelSpace space = ModelSpace::parse(cfg.space);
    auto paths = simulate(cfg, space);
    auto d = estimators::estimate_drift(space, paths, cfg.threads);
    emit("drift", d.est.value, d.est.stderr_, d.est.n, d.est.method);
  } else if (cfg.quantity == "entropy") {
    const ModelSpace space = ModelSpace::parse(cfg.space);
    auto paths = simulate(cfg, space);
    auto h = estimators::estimate_entropy(space, paths, cfg.threads);
    emit("entropy", h.value, h.stderr_, h.n, h.method);
  } else if (cfg.quantity == "lm_km") {
    const ModelSpace space = ModelSpace::parse(cfg.space);
    const std::string spec =
        cfg.horofunction.empty() ? default_horofunction(space) : cfg.horofunction;
    const auto xi = horofield::Horofunction::parse(space, spec);
    const auto k = horofield::minimal_harmonic(space, xi);
    auto paths = simulate(cfg, space);
    auto r = estimators::estimate_lm_km(space, xi, k, paths, cfg.threads);
    emit("lm", r.lm.value, r.lm.stderr_, r.lm.n, r.lm.method);
    emit("km", r.km.value, r.km.stderr_, r.km.n, r.km.method);
    emit("entropy", r.h.value, r.h.stderr_, r.h.n, r.h.method);
    emit("hprime", r.hprime.value, r.hprime.stderr_, r.hprime.n, r.hprime.method);
  } else if (cfg.quantity == "volume_entropy") {
    const ModelSpace space = ModelSpace::parse(cfg.space);
    const auto grid = default_R_grid(space);
    auto v = estimators::estimate_volume_entropy(space, grid, 400000,
                                                 derive_seed(cfg.seed, 0x701));
    emit("volume_entropy", v.value, v.stderr_, v.n, v.method);
  } else if (cfg.quantity == "lambda") {
    const ModelSpace space = ModelSpace::parse(cfg.space);
    const auto sgrid = default_s_grid(space);
    auto l = estimators::estimate_lambda(space, default_lambda_R(space), sgrid);
    emit("lambda", l.exact, 0.0, 0, "closed-form");
    emit("lambda_upper", l.upper.value, 0.0, 0, l.upper.method);
  } else if (cfg.quantity == "cesaro") {
    const ModelSpace space = ModelSpace::parse(cfg.space);
    const auto probes = estimators::default_probe_grid();
    auto c = estimators::harmonic_measure_sample(space, cfg.T,
                                                 static_cast<std::size_t>(cfg.paths),
                                                 probes, 1.0, RngSeed{cfg.seed, 0},
                                                 false, cfg.threads);
    emit("cesaro_flatness", c.median_sup_linear_fit, 0.0,
         static_cast<std::uint64_t>(cfg.paths), "median-sup-linear-fit");
    emit("cesaro_drift", c.drift_functional.value, c.drift_functional.stderr_,
         c.drift_functional.n, c.drift_functional.method);
  } else if (cfg.quantity == "check") {
    auto chk = run_check(cfg);
    const auto& inv = chk.invariants;
    emit("drift", inv.ell.value, inv.ell.stderr_, inv.ell.n, inv.ell.method);
    emit("entropy", inv.h.value, inv.h.stderr_, inv.h.n, inv.h.method);
    emit("volume_entropy", inv.v.value, inv.v.stderr_, inv.v.n, inv.v.method);
    emit("lambda", inv.lambda.value, 0.0, 0, inv.lambda.method);
    for (const auto& v : chk.verdicts)
      emit("check:" + v.name, v.lhs.value - v.rhs.value, v.lhs.stderr_ + v.rhs.stderr_,
           0, v.verdict);
  } else {
    throw Error("parse_error", "unknown quantity '" + cfg.quantity + "'");
  }

  if (store)
    for (const auto& r : out.records) store->append(r);
  return out;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

std::string fmt_est(double value, double se, bool exact_like) {
  char buf[64];
  if (exact_like)
    std::snprintf(buf, sizeof buf, "%.6g (exact)", value);
  else
    std::snprintf(buf, sizeof buf, "%.4f +/- %.4f", value, se);
  return buf;
}

}  // namespace

std::string report(const ResultStore& store, const std::string& space_filter,
                   const std::string& format) {
  const auto& records = store.records();
  std::vector<const ResultRecord*> selected;
  for (const auto& r : records) {
    const std::string sp = r.config.value("space", "");
    if (space_filter.empty() || sp == space_filter) selected.push_back(&r);
  }
  if (selected.empty()) throw Error("empty_store", "no records match the report filter");

  if (format == "csv") {
    std::ostringstream os;
    os << "space,quantity,value,stderr,n,method,version\n";
    for (const auto* r : selected) {
      os << r->config.value("space", "") << "," << r->quantity << "," << r->value << ","
         << r->stderr_ << "," << r->n << "," << r->method << "," << r->version << "\n";
    }
    return os.str();
  }
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto* r : selected) arr.push_back(r->to_json());
    return arr.dump(2) + "\n";
  }

  // markdown
  std::ostringstream os;
  os << "# horodrift report\n\n";
  os << "Inequality (1): ell^2 <= h, for Brownian motion on a cocompact cover.\n\n";

  // group spaces by space id, preserving first-seen order
  std::vector<std::string> spaces;
  for (const auto* r : selected) {
    const std::string sp = r->config.value("space", "");
    if (std::find(spaces.begin(), spaces.end(), sp) == spaces.end()) spaces.push_back(sp);
  }

  for (const auto& sp : spaces) {
    if (is_group_id(sp)) continue;
    std::vector<const ResultRecord*> rs;
    for (const auto* r : selected)
      if (r->config.value("space", "") == sp) rs.push_back(r);
    auto last_of = [&](const std::string& q) -> const ResultRecord* {
      const ResultRecord* hit = nullptr;
      for (const auto* r : rs)
        if (r->quantity == q) hit = r;
      return hit;
    };
    const auto* ell = last_of("drift");
    const auto* h = last_of("entropy");
    const auto* v = last_of("volume_entropy");
    const auto* lam = last_of("lambda");
    os << "## space " << sp << "\n\n";
    os << "| invariant | estimate |\n|---|---|\n";
    if (ell)
      os << "| ell (linear drift) | "
         << fmt_est(ell->value, ell->stderr_, ell->method == "closed-form") << " |\n";
    if (h)
      os << "| h (stochastic entropy) | "
         << fmt_est(h->value, h->stderr_, h->method == "closed-form") << " |\n";
    if (v)
      os << "| v (volume entropy) | "
         << fmt_est(v->value, v->stderr_, v->method == "closed-form") << " |\n";
    if (lam) os << "| lambda (spectrum bottom) | " << fmt_est(lam->value, 0.0, true) << " |\n";
    os << "\n";

    if (ell && h && v && lam) {
      const ModelSpace space = ModelSpace::parse(sp);
      InvariantSet inv;
      inv.ell = {ell->value, ell->stderr_, ell->n, ell->config.value("T", 0.0),
                 ell->method, ell->method == "closed-form"};
      inv.h = {h->value, h->stderr_, h->n, h->config.value("T", 0.0), h->method,
               h->method == "closed-form"};
      inv.v = {v->value, v->stderr_, v->n, 0.0, v->method, v->method == "closed-form"};
      inv.lambda = {lam->value, 0.0, 0, 0.0, lam->method, true};
      const double T = ell->config.value("T", 50.0);
      const auto R_grid = default_R_grid(space);
      const auto verdicts = inequality_verdicts(space, inv, T, R_grid);
      os << "| inequality | lhs | rhs | slack | verdict |\n|---|---|---|---|---|\n";
      bool all_eq = true;
      for (const auto& vd : verdicts) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "| %s | %.4f | %.4f | %.4f | %s |\n",
                      vd.name.c_str(), vd.lhs.value, vd.rhs.value, vd.slack,
                      vd.verdict.c_str());
        os << buf;
        if (vd.verdict != "equality-within-tolerance") all_eq = false;
        if (vd.name == "4*lambda<=v^2" && vd.verdict == "equality-within-tolerance")
          os.flush();
      }
      os << "\n";
      if (all_eq)
        os << "All six comparisons sit at equality within tolerance: the symmetric-space "
              "equality chain ell = v, h = v^2, 4 lambda = v^2 (equality in (1) via the "
              "4 lambda = v^2 case).\n\n";
    }
  }

  // group table
  bool have_groups = false;
  for (const auto& sp : spaces)
    if (is_group_id(sp)) have_groups = true;
  if (have_groups) {
    os << "## discrete random walks (word metric)\n\n";
    os << "| group | n | drift ell_w | ell_w^2 (extrapolated) | H(mu*n)/n (certified ub) | "
          "limit est | observation |\n|---|---|---|---|---|---|---|\n";
    for (const auto& sp : spaces) {
      if (!is_group_id(sp)) continue;
      std::vector<const ResultRecord*> rs;
      for (const auto* r : selected)
        if (r->config.value("space", "") == sp) rs.push_back(r);
      auto val = [&](const std::string& q, double dflt) {
        for (const auto* r : rs)
          if (r->quantity == q) return r->value;
        return dflt;
      };
      std::uint64_t n = 0;
      for (const auto* r : rs)
        if (r->quantity == "word_drift") n = r->n;
      const double drift = val("word_drift", 0.0);
      const double dlim = std::max(0.0, val("word_drift_limit", drift));
      const double ub = val("word_entropy_ub", 0.0);
      const double lim = val("word_entropy_limit", ub);
      const char* verdict = ub + 1e-9 < dlim * dlim ? "anomalous (check!)" : "consistent";
      char buf[200];
      std::snprintf(buf, sizeof buf, "| %s | %llu | %.4f | %.4f | %.4f | %.4f | %s |\n",
                    sp.c_str(), static_cast<unsigned long long>(n), drift, dlim * dlim,
                    ub, lim, verdict);
      os << buf;
    }
    os << "\nThis table reports observations only. A precise result similar to (1) is "
          "not known for discrete random walks.\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

namespace {

struct SelftestRunner {
  SelftestResult result;
  std::uint64_t seed;
  int threads;
  bool quick;

  void item(const std::string& name, bool pass, const std::string& info = "") {
    result.items.push_back({name, pass, info});
  }

  template <typename F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      item(name + " [exception]", false, e.what());
    }
  }
};

std::string num_info(double got, double want, double tol) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "got=%.6g want=%.6g tol=%.2g", got, want, tol);
  return buf;
}

}  // namespace

SelftestResult selftest(std::uint64_t seed, int threads, bool quick) {
  using namespace estimators;
  using namespace horofield;
  using brownian::Scheme;

  const auto t0 = std::chrono::steady_clock::now();
  SelftestRunner R{{}, seed, threads, quick};
  const std::size_t small = quick ? 200 : 2000;
  const auto h2 = ModelSpace::half_plane();
  const auto r2 = ModelSpace::euclidean(2);
  const auto h2xh2 = ModelSpace::product(ModelSpace::half_plane(), ModelSpace::half_plane());

  // geometry: metric axioms on random triples
  R.guarded("geometry.metric-axioms", [&] {
    bool ok = true;
    for (const auto& space : {r2, h2, h2xh2}) {
      auto pts = geometry::sample_uniform_ball(space, 3.0, 3 * small / 2,
                                               RngSeed{derive_seed(seed, 1), 0});
      for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
        const double dab = geometry::distance(space, pts[i], pts[i + 1]);
        const double dba = geometry::distance(space, pts[i + 1], pts[i]);
        const double dac = geometry::distance(space, pts[i], pts[i + 2]);
        const double dcb = geometry::distance(space, pts[i + 2], pts[i + 1]);
        ok = ok && std::abs(dab - dba) <= 1e-12 && dab <= dac + dcb + 1e-12;
      }
    }
    R.item("geometry.metric-axioms", ok);
  });

  R.guarded("geometry.geodesic-additivity", [&] {
    bool ok = true;
    Rng rng(RngSeed{derive_seed(seed, 2), 0});
    for (std::size_t i = 0; i < small / 10; ++i) {
      const Point p{{2.0 * rng.uniform() - 1.0, 0.5 + 2.0 * rng.uniform()}};
      const double a = 2.0 * kPi * rng.uniform();
      const geometry::Vec v{p[1] * std::sin(a), p[1] * std::cos(a)};
      const double s = 3.0 * rng.uniform(), t = 3.0 * rng.uniform();
      const Point q1 = geometry::geodesic_ray(h2, p, v, s);
      const Point q2 = geometry::geodesic_ray(h2, p, v, s + t);
      ok = ok && std::abs(geometry::distance(h2, q1, q2) - t) < 1e-9;
    }
    R.item("geometry.geodesic-additivity", ok);
  });

  R.guarded("geometry.ball-volume-monotone", [&] {
    double prev = 0.0;
    bool ok = true;
    for (double r : {1.0, 2.0, 3.0, 4.0}) {
      const auto v = geometry::ball_volume(h2xh2, r, quick ? 20000 : 50000,
                                           RngSeed{derive_seed(seed, 3), 0});
      ok = ok && v.value > prev;
      prev = v.value;
    }
    R.item("geometry.ball-volume-monotone", ok);
  });

  // horofield
  R.guarded("horofield.lipschitz", [&] {
    bool ok = true;
    auto xi1 = Horofunction::boundary(h2, HalfPlanePoint{0.7, false});
    auto xi2 = Horofunction::finite_point(h2, Point{{2.0, 3.0}});
    auto pts = geometry::sample_uniform_ball(h2, 4.0, small,
                                             RngSeed{derive_seed(seed, 4), 0});
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
      const double d = geometry::distance(h2, pts[i], pts[i + 1]);
      ok = ok && std::abs(xi1(pts[i]) - xi1(pts[i + 1])) <= d + 1e-9;
      ok = ok && std::abs(xi2(pts[i]) - xi2(pts[i + 1])) <= d + 1e-9;
    }
    R.item("horofield.lipschitz", ok);
  });

  R.guarded("horofield.fd-vs-analytic", [&] {
    auto xi = Horofunction::boundary(h2, HalfPlanePoint{0.0, true});
    auto f = horofunction_field(h2, xi);
    bool ok = true;
    Rng rng(RngSeed{derive_seed(seed, 5), 0});
    for (int i = 0; i < 10; ++i) {
      const Point p{{4.0 * rng.uniform() - 2.0, 0.3 + 2.0 * rng.uniform()}};
      const auto gfd = gradient_fd(f, p);
      const auto gan = f.grad_analytic(p);
      ok = ok && std::abs(grad_norm(h2, p, gfd) - grad_norm(h2, p, gan)) < 1e-5;
      ok = ok && std::abs(laplacian_fd(f, p) - f.lap_analytic(p)) < 1e-5;
    }
    R.item("horofield.fd-vs-analytic", ok);
  });

  R.guarded("horofield.eigenvalue-sweep", [&] {
    bool ok = true;
    Rng rng(RngSeed{derive_seed(seed, 6), 0});
    for (double theta : {0.0, kPi / 8, kPi / 4, 3 * kPi / 8, kPi / 2}) {
      const auto xi = Horofunction::boundary(
          h2xh2, ProductBoundary{HalfPlanePoint{0, true}, HalfPlanePoint{0, true}, theta});
      const auto k = minimal_harmonic(h2xh2, xi);
      const double want = 2.0 - std::sqrt(2.0) * (std::cos(theta) + std::sin(theta));
      for (int i = 0; i < (quick ? 1 : 3); ++i) {
        const Point p{{rng.uniform() - 0.5, 0.5 + rng.uniform(), rng.uniform() - 0.5,
                       0.5 + rng.uniform()}};
        ScalarField plain{h2xh2, k.eval, nullptr, nullptr, nullptr, std::nullopt};
        const double got = laplacian_fd(plain, p) / k.eval(p);
        ok = ok && std::abs(got - want) < 1e-4;
      }
    }
    R.item("horofield.eigenvalue-sweep", ok);
  });

  R.guarded("horofield.integrand-identities", [&] {
    bool ok = true;
    Rng rng(RngSeed{derive_seed(seed, 7), 0});
    for (const auto& space : {h2, h2xh2}) {
      const auto spec = default_horofunction(space);
      const auto xi = Horofunction::parse(space, spec);
      const auto xif = horofunction_field(space, xi);
      const auto lnk = log_minimal_harmonic(space, xi);
      const double ell = space.known_drift();
      for (int i = 0; i < 10; ++i) {
        geometry::Vec c;
        for (int d = 0; d < space.dim(); ++d)
          c.push_back(d % 2 == 1 ? 0.5 + rng.uniform() : rng.uniform() - 0.5);
        const Point p{c};
        const auto gk = gradient_fd(lnk, p);
        const auto gx = gradient_fd(xif, p);
        const double k2 = geometry::inner(space, p, gk, gk);
        const double lm = -geometry::inner(space, p, gx, gk);
        ok = ok && std::abs(k2 - ell * ell) < 1e-5 && std::abs(lm - ell) < 1e-5;
      }
    }
    R.item("horofield.integrand-identities", ok);
  });

  // brownian
  R.guarded("brownian.flat-msd", [&] {
    auto paths = brownian::sample_paths(r2, r2.basepoint(), 1.0, Scheme::Exact, 0.01,
                                        derive_seed(seed, 8), small, threads);
    double msd = 0.0;
    for (const auto& p : paths) {
      const double d = geometry::distance(r2, p.start, p.end());
      msd += d * d;
    }
    msd /= static_cast<double>(paths.size());
    const double tol = 4.0 * 4.0 / std::sqrt(static_cast<double>(small));
    R.item("brownian.flat-msd", std::abs(msd - 4.0) < tol, num_info(msd, 4.0, tol));
  });

  R.guarded("brownian.h2-log-drift", [&] {
    const double T = quick ? 2.0 : 5.0;
    auto paths = brownian::sample_paths(h2, h2.basepoint(), T, Scheme::Euler, 0.01,
                                        derive_seed(seed, 9), small, threads);
    std::vector<double> vals;
    for (const auto& p : paths) vals.push_back(-std::log(p.end()[1]) / T);
    auto ms = mean_stderr(vals);
    R.item("brownian.h2-log-drift", std::abs(ms.mean - 1.0) < 4.0 * ms.stderr_ + 1e-3,
           num_info(ms.mean, 1.0, 4.0 * ms.stderr_));
  });

  R.guarded("brownian.reproducible-across-threads", [&] {
    auto a = brownian::sample_paths(h2xh2, h2xh2.basepoint(), 1.0, Scheme::Euler, 0.01,
                                    derive_seed(seed, 10), 8, 1);
    auto b = brownian::sample_paths(h2xh2, h2xh2.basepoint(), 1.0, Scheme::Euler, 0.01,
                                    derive_seed(seed, 10), 8, 4);
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a[i].checkpoints.size(); ++k)
        for (std::size_t c = 0; c < a[i].checkpoints[k].second.dim(); ++c)
          ok = ok && a[i].checkpoints[k].second[c] == b[i].checkpoints[k].second[c];
    R.item("brownian.reproducible-across-threads", ok);
  });

  R.guarded("brownian.kernel-symmetry", [&] {
    const Point p{{0.3, 1.7}}, q{{-1.1, 0.4}};
    const double a = brownian::heat_kernel(h2, 1.0, p, q);
    const double b = brownian::heat_kernel(h2, 1.0, q, p);
    R.item("brownian.kernel-symmetry", std::abs(a - b) <= 1e-12 * std::max(a, b));
  });

  R.guarded("brownian.kernel-normalization", [&] {
    const double mass = integrate_adaptive(
        [&](double r) {
          return std::exp(brownian::log_heat_kernel_radial(h2, 1.0, r)) * 2.0 * kPi *
                 std::sinh(r);
        },
        {0.0, 1.0, 3.0, 8.0, 20.0, 40.0}, 1e-9);
    R.item("brownian.kernel-normalization", std::abs(mass - 1.0) < 1e-6,
           num_info(mass, 1.0, 1e-6));
  });

  R.guarded("brownian.semigroup", [&] {
    const Point p = h2.basepoint();
    // q at distance 1 from (0,1) along the vertical geodesic
    const Point qv{{0.0, std::exp(1.0)}};
    auto res = brownian::semigroup_check(h2, 1.0, 1.0, p, qv, quick ? 20000 : 100000,
                                         RngSeed{derive_seed(seed, 11), 0});
    const double rel = std::abs(res.lhs - res.rhs) / res.rhs;
    R.item("brownian.semigroup", rel < 0.04, num_info(res.lhs, res.rhs, 0.04));
  });

  R.guarded("brownian.semigroup-fault-injection", [&] {
    const Point p = h2.basepoint();
    const Point qv{{0.0, std::exp(1.0)}};
    auto res = brownian::semigroup_check(h2, 1.0, 1.0, p, qv, quick ? 20000 : 50000,
                                         RngSeed{derive_seed(seed, 12), 0}, 1.1);
    const double rel = std::abs(res.lhs - res.rhs) / res.rhs;
    R.item("brownian.semigroup-fault-injection", rel > 0.05,
           "perturbed kernel must fail the check; rel=" + std::to_string(rel));
  });

  R.guarded("brownian.gaussian-bound", [&] {
    std::vector<double> ds;
    for (int i = 0; i <= 40; ++i) ds.push_back(0.5 * i);
    bool ok = true;
    for (double t : {0.5, 1.0, 2.0}) {
      const auto rep = brownian::gaussian_bound_check(h2, t, ds);
      ok = ok && rep.holds;
    }
    R.item("brownian.gaussian-bound", ok);
  });

  // estimators
  R.guarded("estimators.drift-vs-kernel-form", [&] {
    const double T = quick ? 5.0 : 10.0;
    auto paths = brownian::sample_paths(h2, h2.basepoint(), T, Scheme::Euler, 0.01,
                                        derive_seed(seed, 13), small, threads);
    auto d = estimate_drift(h2, paths, threads);
    const double grid[] = {T};
    auto dk = estimate_drift_kernel(h2, grid, small, 0.01, derive_seed(seed, 14), threads);
    const double tol = 3.0 * (d.est.stderr_ + dk.est.stderr_);
    R.item("estimators.drift-vs-kernel-form", std::abs(d.est.value - dk.est.value) < tol,
           num_info(d.est.value, dk.est.value, tol));
  });

  R.guarded("estimators.lmkm-identities", [&] {
    const double T = quick ? 5.0 : 10.0;
    auto xi = Horofunction::parse(h2, "q:inf");
    auto k = minimal_harmonic(h2, xi);
    auto paths = brownian::sample_paths(h2, h2.basepoint(), T, Scheme::Euler, 0.01,
                                        derive_seed(seed, 15), small, threads);
    auto r = estimate_lm_km(h2, xi, k, paths, threads);
    auto d = estimate_drift(h2, paths, threads);
    bool ok = r.hprime.value == r.h.value - r.km.value;        // exact in arithmetic
    ok = ok && r.hprime.value > -3.0 * r.hprime.stderr_;       // reverse entropy >= 0
    ok = ok && r.lm.value <= d.est.value + 3.0 * (r.lm.stderr_ + d.est.stderr_);
    ok = ok && r.km.value <= r.h.value + 3.0 * (r.km.stderr_ + r.h.stderr_);
    R.item("estimators.lmkm-identities", ok);
  });

  R.guarded("estimators.volume-entropy", [&] {
    const double grid[] = {10, 12, 14, 16, 18, 20};
    auto v = estimate_volume_entropy(h2, grid);
    const double slope = volume_entropy_slope(h2, grid);
    R.item("estimators.volume-entropy",
           v.exact && v.value == 1.0 && std::abs(slope - 1.0) < 0.02,
           num_info(slope, 1.0, 0.02));
  });

  R.guarded("estimators.lambda", [&] {
    const auto sg_h2 = default_s_grid(h2);
    auto lh = estimate_lambda(h2, 40.0, sg_h2);
    const auto sg_r2 = default_s_grid(r2);
    auto lr = estimate_lambda(r2, 50.0, sg_r2);
    bool ok = lh.upper.value >= 0.25 && lh.upper.value <= 0.26;
    ok = ok && lr.upper.value <= 0.01;
    R.item("estimators.lambda", ok,
           "h2 ub=" + std::to_string(lh.upper.value) + " r2 ub=" + std::to_string(lr.upper.value));
  });

  R.guarded("estimators.cesaro", [&] {
    const auto probes = default_probe_grid();
    auto c = harmonic_measure_sample(r2, quick ? 1e3 : 1e4, quick ? 300 : 1000, probes,
                                     1.0, RngSeed{derive_seed(seed, 16), 0}, false,
                                     threads);
    bool ok = c.median_sup_linear_fit < (quick ? 0.05 : 0.02);
    ok = ok && std::abs(c.drift_functional.value) < 4.0 * c.drift_functional.stderr_ + 1e-3;
    R.item("estimators.cesaro", ok,
           "flatness=" + std::to_string(c.median_sup_linear_fit));
  });

  // group walks
  R.guarded("groups.brute-force-oracle", [&] {
    // enumerate all (2k)^n words of F_2 and reduce; radial chain must agree
    const auto g = group_walks::GroupSpec::free_group(2);
    const int n = quick ? 5 : 6;
    auto chain = group_walks::convolve_n(g, n);
    std::vector<double> bylen(static_cast<std::size_t>(n) + 1, 0.0);
    const int gens = 4;
    std::vector<int> word(static_cast<std::size_t>(n));
    const double pw = std::pow(1.0 / gens, n);
    std::vector<int> stack;
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(gens);
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t c = code;
      stack.clear();
      for (int i = 0; i < n; ++i) {
        const int gsym = static_cast<int>(c % gens);
        c /= gens;
        // generators 0,1 and inverses 2,3
        if (!stack.empty() && (stack.back() ^ 2) == gsym)
          stack.pop_back();
        else
          stack.push_back(gsym);
      }
      bylen[stack.size()] += pw;
    }
    bool ok = true;
    for (int l = 0; l <= n; ++l)
      ok = ok && std::abs(bylen[static_cast<std::size_t>(l)] - chain.prob_length(l)) < 1e-15;
    R.item("groups.brute-force-oracle", ok);
    (void)word;
  });

  R.guarded("groups.normalization-and-monotone", [&] {
    const auto z2 = group_walks::GroupSpec::lattice(2);
    const int grid[] = {4, 8, 16, 32};
    auto ent = group_walks::word_entropy(z2, grid);
    bool ok = true;
    for (std::size_t i = 1; i < ent.h_over_n.size(); ++i)
      ok = ok && ent.h_over_n[i].second <= ent.h_over_n[i - 1].second + 1e-12;
    auto d = group_walks::convolve_n(z2, 16);
    ok = ok && std::abs(d.mass() - 1.0) < 1e-12;
    R.item("groups.normalization-and-monotone", ok);
  });

  // harness
  R.guarded("harness.config-parse", [&] {
    auto cfg = ExperimentConfig::parse("space = h2\nquantity = drift\n# comment\n");
    bool ok = cfg.space == "h2" && cfg.quantity == "drift" && cfg.T == 50.0 &&
              cfg.dt == 0.01 && cfg.paths == 10000 && cfg.seed == 0;
    bool threw = false;
    try {
      (void)ExperimentConfig::parse("space = nosuch\n");
    } catch (const Error& e) {
      threw = std::string(e.code()) == "unknown_space";
    }
    R.item("harness.config-parse", ok && threw);
  });

  R.guarded("harness.verdict-truth-table", [&] {
    auto v1 = make_verdict("t", {1.0, 0.01, 0.0, false}, {2.0, 0.01, 0.0, false});
    auto v2 = make_verdict("t", {2.0, 0.01, 0.0, false}, {1.0, 0.01, 0.0, false});
    auto v3 = make_verdict("t", {1.0, 0.01, 0.05, false}, {1.02, 0.01, 0.0, false});
    R.item("harness.verdict-truth-table", v1.verdict == "consistent" &&
                                              v2.verdict == "violated" &&
                                              v3.verdict == "equality-within-tolerance");
  });

  R.guarded("harness.store-roundtrip", [&] {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "horodrift_selftest_store.jsonl";
    std::error_code ec;
    fs::remove(path, ec);
    {
      ResultStore st(path.string());
      ExperimentConfig cfg;
      cfg.space = "h2";
      cfg.quantity = "drift";
      st.append(make_record(cfg, "drift", 1.25, 0.002, 100, "mc-drift", 1.0));
    }
    ResultStore st2(path.string());
    bool ok = st2.records().size() == 1 && st2.records()[0].value == 1.25 &&
              st2.records()[0].quantity == "drift";
    fs::remove(path, ec);
    R.item("harness.store-roundtrip", ok);
  });

  R.result.all_pass = true;
  for (const auto& it : R.result.items) R.result.all_pass = R.result.all_pass && it.pass;
  R.result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return R.result;
}

}  // namespace horodrift::harness
