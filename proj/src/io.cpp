#include "pdruin/io.hpp"

#include "pdruin/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pdruin {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config field '" + path + "': " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void allow_only(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

double number_or(const json& j, const std::string& path, const char* key, double dflt) {
  return j.contains(key) ? number(j.at(key), join(path, key)) : dflt;
}

std::int64_t integer_or(const json& j, const std::string& path, const char* key, std::int64_t dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::string string_or(const json& j, const std::string& path, const char* key, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename F>
auto convert(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

PhaseType read_phase_type(const json& j, const std::string& path) {
  allow_only(j, path, {"beta", "B"});
  if (!j.contains("beta")) fail(join(path, "beta"), "missing");
  if (!j.contains("B")) fail(join(path, "B"), "missing");
  const auto beta = number_array(j.at("beta"), join(path, "beta"));
  const json& rows = j.at("B");
  const std::string bpath = join(path, "B");
  if (!rows.is_array() || rows.size() != beta.size()) fail(bpath, "expected a square array matching beta");
  const int n = static_cast<int>(beta.size());
  if (n == 0) fail(join(path, "beta"), "empty");
  Eigen::MatrixXd B(n, n);
  for (int r = 0; r < n; ++r) {
    const auto row = number_array(rows[static_cast<std::size_t>(r)], bpath + "[" + std::to_string(r) + "]");
    if (static_cast<int>(row.size()) != n) fail(bpath + "[" + std::to_string(r) + "]", "row length differs from beta");
    for (int c = 0; c < n; ++c) B(r, c) = row[static_cast<std::size_t>(c)];
  }
  Eigen::RowVectorXd b = Eigen::Map<const Eigen::RowVectorXd>(beta.data(), n);
  const PhaseType pt(b, B);
  const auto rep = validate(pt);
  if (!rep.ok()) fail(path, rep.summary());
  return pt;
}

DriftSpec read_drift(const json& j, const std::string& path, const ModelSpec& m) {
  const std::string kind = string_or(j, path, "kind", "");
  if (kind == "constant") {
    allow_only(j, path, {"kind", "c"});
    if (!j.contains("c")) fail(join(path, "c"), "missing");
    return DriftSpec::constant(number(j.at("c"), join(path, "c")));
  }
  if (kind == "phi_k") {
    allow_only(j, path, {"kind", "K"});
    if (!j.contains("K")) fail(join(path, "K"), "missing");
    if (!m.jumps.is_exponential()) fail(path, "phi_k drift needs single-phase exponential jumps");
    const double K = number(j.at("K"), join(path, "K"));
    return convert(path, [&] { return phi_k_drift(K, m.jump_rate, m.kill_rate, m.jumps.exponential_rate()); });
  }
  if (kind == "tabulated") {
    allow_only(j, path, {"kind", "x", "phi", "interpolation"});
    if (!j.contains("x") || !j.contains("phi")) fail(path, "tabulated drift needs 'x' and 'phi'");
    auto xs = number_array(j.at("x"), join(path, "x"));
    auto ps = number_array(j.at("phi"), join(path, "phi"));
    const std::string rule = string_or(j, path, "interpolation", "cubic");
    DriftSpec::Interpolation interp;
    if (rule == "cubic") interp = DriftSpec::Interpolation::cubic;
    else if (rule == "linear") interp = DriftSpec::Interpolation::linear;
    else fail(join(path, "interpolation"), "expected 'linear' or 'cubic'");
    return convert(path, [&] { return DriftSpec::tabulated(std::move(xs), std::move(ps), interp); });
  }
  fail(join(path, "kind"), "expected 'constant', 'phi_k' or 'tabulated'");
}

ModelSpec read_model(const json& j) {
  const std::string path = "model";
  allow_only(j, path, {"drift", "jump_rate", "kill_rate", "jumps", "direction"});
  ModelSpec m;
  m.jump_rate = number_or(j, path, "jump_rate", 1.0);
  m.kill_rate = number_or(j, path, "kill_rate", 0.0);
  if (!(m.jump_rate > 0.0)) fail(join(path, "jump_rate"), "must be positive");
  if (!(m.kill_rate >= 0.0)) fail(join(path, "kill_rate"), "must be nonnegative");
  if (!j.contains("jumps")) fail(join(path, "jumps"), "missing");
  m.jumps = read_phase_type(j.at("jumps"), join(path, "jumps"));
  m.direction = convert(join(path, "direction"),
                        [&] { return jump_direction_from_string(string_or(j, path, "direction", "downward")); });
  if (!j.contains("drift")) fail(join(path, "drift"), "missing");
  m.drift = read_drift(j.at("drift"), join(path, "drift"), m);
  return m;
}

PassageProblem read_problem(const json& j) {
  const std::string path = "problem";
  allow_only(j, path, {"lower", "upper", "estimand", "overshoot_xi"});
  PassageProblem p;
  p.lower = number_or(j, path, "lower", 0.0);
  if (j.contains("upper") && !j.at("upper").is_null()) p.upper = number(j.at("upper"), join(path, "upper"));
  p.estimand = convert(join(path, "estimand"),
                       [&] { return estimand_from_string(string_or(j, path, "estimand", "ruin_below")); });
  p.overshoot_xi = number_or(j, path, "overshoot_xi", 0.0);
  convert(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ordered_json drift_to_json(const DriftSpec& d) {
  ordered_json j;
  if (const auto* c = std::get_if<DriftSpec::Constant>(&d.kind())) {
    j["kind"] = "constant";
    j["c"] = c->c;
  } else if (const auto* s = std::get_if<DriftSpec::PhiKFamily>(&d.kind())) {
    j["kind"] = "phi_k";
    j["K"] = s->K;
  } else {
    const auto& t = std::get<DriftSpec::Tabulated>(d.kind());
    j["kind"] = "tabulated";
    j["x"] = t.x;
    j["phi"] = t.phi;
    j["interpolation"] = t.rule == DriftSpec::Interpolation::cubic ? "cubic" : "linear";
  }
  return j;
}

std::string killing_name(KillingMode k) { return k == KillingMode::weight ? "weight" : "explicit_horizon"; }

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

RunConfig figure1_config() {
  RunConfig cfg;
  cfg.model.jump_rate = 0.5;
  cfg.model.kill_rate = 0.5;
  cfg.model.jumps = PhaseType::exponential(1.5);
  cfg.model.drift = phi_k_drift(0.75, 0.5, 0.5, 1.5);
  cfg.grid = {0.0, 5.0, 101};
  cfg.output.prefix = "figure1";
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  allow_only(j, "", {"schema_version", "model", "problem", "grid", "simulation", "compare", "output"});
  if (!j.contains("schema_version")) fail("schema_version", "missing");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != schema_version)
    fail("schema_version", "expected " + std::to_string(schema_version));

  RunConfig cfg;
  if (!j.contains("model")) fail("model", "missing");
  cfg.model = read_model(j.at("model"));
  if (j.contains("problem")) cfg.problem = read_problem(j.at("problem"));

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    allow_only(g, "grid", {"from", "to", "points"});
    cfg.grid.from = number_or(g, "grid", "from", cfg.grid.from);
    cfg.grid.to = number_or(g, "grid", "to", cfg.grid.to);
    cfg.grid.points = static_cast<int>(integer_or(g, "grid", "points", cfg.grid.points));
    if (cfg.grid.points < 2) fail("grid.points", "need at least 2");
    if (!(cfg.grid.to > cfg.grid.from)) fail("grid", "'to' must exceed 'from'");
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    const std::string p = "simulation";
    allow_only(s, p, {"x0", "paths", "seed", "max_time", "killing", "threads", "flow_tolerance"});
    auto& sim = cfg.simulation;
    sim.x0 = number_or(s, p, "x0", sim.x0);
    sim.paths = integer_or(s, p, "paths", sim.paths);
    if (sim.paths < 1) fail("simulation.paths", "must be >= 1");
    const std::int64_t seed = integer_or(s, p, "seed", static_cast<std::int64_t>(sim.seed));
    if (seed < 0) fail("simulation.seed", "must be nonnegative");
    sim.seed = static_cast<std::uint64_t>(seed);
    sim.max_time = number_or(s, p, "max_time", sim.max_time);
    if (sim.max_time < 0.0) fail("simulation.max_time", "must be >= 0");
    const std::string k = string_or(s, p, "killing", "weight");
    if (k == "weight") sim.killing = KillingMode::weight;
    else if (k == "explicit_horizon") sim.killing = KillingMode::explicit_horizon;
    else fail("simulation.killing", "expected 'weight' or 'explicit_horizon'");
    sim.threads = static_cast<int>(integer_or(s, p, "threads", sim.threads));
    sim.flow_tolerance = number_or(s, p, "flow_tolerance", sim.flow_tolerance);
    if (!(sim.flow_tolerance > 0.0)) fail("simulation.flow_tolerance", "must be positive");
  }
  if (j.contains("compare")) {
    const json& c = j.at("compare");
    allow_only(c, "compare", {"methods", "mc_points"});
    if (c.contains("methods")) {
      const json& ms = c.at("methods");
      if (!ms.is_array()) fail("compare.methods", "expected an array of method names");
      cfg.compare.methods.clear();
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string p = "compare.methods[" + std::to_string(i) + "]";
        if (!ms[i].is_string()) fail(p, "expected a string");
        cfg.compare.methods.push_back(convert(p, [&] { return method_from_string(ms[i].get<std::string>()); }));
      }
    }
    cfg.compare.mc_points = static_cast<int>(integer_or(c, "compare", "mc_points", cfg.compare.mc_points));
    if (cfg.compare.mc_points < 0) fail("compare.mc_points", "must be >= 0");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    allow_only(o, "output", {"directory", "format", "prefix"});
    cfg.output.directory = string_or(o, "output", "directory", cfg.output.directory);
    cfg.output.format = string_or(o, "output", "format", cfg.output.format);
    cfg.output.prefix = string_or(o, "output", "prefix", cfg.output.prefix);
    if (cfg.output.format != "csv" && cfg.output.format != "json") fail("output.format", "expected 'csv' or 'json'");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = schema_version;
  ordered_json m;
  m["drift"] = drift_to_json(cfg.model.drift);
  m["jump_rate"] = cfg.model.jump_rate;
  m["kill_rate"] = cfg.model.kill_rate;
  m["jumps"] = to_json(cfg.model.jumps);
  m["direction"] = to_string(cfg.model.direction);
  j["model"] = m;
  ordered_json p;
  p["lower"] = cfg.problem.lower;
  p["upper"] = std::isfinite(cfg.problem.upper) ? ordered_json(cfg.problem.upper) : ordered_json(nullptr);
  p["estimand"] = to_string(cfg.problem.estimand);
  p["overshoot_xi"] = cfg.problem.overshoot_xi;
  j["problem"] = p;
  j["grid"] = {{"from", cfg.grid.from}, {"to", cfg.grid.to}, {"points", cfg.grid.points}};
  const auto& s = cfg.simulation;
  j["simulation"] = {{"x0", s.x0},
                     {"paths", s.paths},
                     {"seed", s.seed},
                     {"max_time", s.max_time},
                     {"killing", killing_name(s.killing)},
                     {"threads", s.threads},
                     {"flow_tolerance", s.flow_tolerance}};
  ordered_json methods = ordered_json::array();
  for (Method me : cfg.compare.methods) methods.push_back(to_string(me));
  j["compare"] = {{"methods", methods}, {"mc_points", cfg.compare.mc_points}};
  j["output"] = {{"directory", cfg.output.directory}, {"format", cfg.output.format}, {"prefix", cfg.output.prefix}};
  return j;
}

std::string dump_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

ordered_json to_json(const PhaseType& pt) {
  ordered_json j;
  ordered_json beta = ordered_json::array();
  for (int i = 0; i < pt.size(); ++i) beta.push_back(pt.beta()(i));
  j["beta"] = beta;
  j["B"] = matrix_to_json(pt.sub_generator());
  return j;
}

PhaseType phase_type_from_json(const json& j) { return read_phase_type(j, "jumps"); }

ordered_json to_json(const ClosureReport& rep) {
  ordered_json j;
  j["dimension"] = rep.dimension;
  j["closed"] = rep.closed;
  j["solvable"] = rep.solvable;
  j["dimension_cap_reached"] = rep.dimension_cap_reached;
  j["derived_series_dims"] = rep.derived_series_dims;
  j["generations"] = rep.generations;
  ordered_json basis = ordered_json::array();
  for (const auto& b : rep.basis) basis.push_back(matrix_to_json(b));
  j["basis"] = basis;
  j["notes"] = rep.notes;
  return j;
}

ordered_json to_json(const IntegrabilityResult& res) {
  ordered_json j;
  j["integrable"] = res.integrable;
  j["c0"] = res.params.c0;
  j["c1"] = res.params.c1;
  j["c2"] = res.params.c2;
  j["kappa"] = res.params.kappa;
  j["max_deviation"] = res.max_deviation;
  j["scale"] = res.scale;
  j["witness_x"] = res.witness_x;
  j["grid_points"] = res.grid.size();
  return j;
}

ordered_json to_json(const SolutionCurve& curve) {
  ordered_json j;
  j["method"] = to_string(curve.method);
  j["x"] = curve.grid;
  j["psi"] = curve.psi;
  j["m"] = matrix_to_json(curve.m);
  if (!curve.error_estimate.empty()) j["error_estimate"] = curve.error_estimate;
  return j;
}

ordered_json to_json(const PassageEstimate& est, double x0) {
  ordered_json j;
  j["target"] = est.target;
  j["x0"] = x0;
  j["mean"] = est.mean;
  j["std_error"] = est.std_error;
  j["n_paths"] = est.n_paths;
  j["n_ruined"] = est.n_ruined;
  j["n_escaped"] = est.n_escaped;
  j["n_censored"] = est.n_censored;
  j["n_killed"] = est.n_killed;
  j["max_time"] = est.max_time;
  j["all_censored"] = est.all_censored;
  return j;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const SolutionCurve& curve) {
  os << "x,psi";
  for (int c = 0; c < curve.m.cols(); ++c) os << ",m_" << (c + 1);
  os << ",method\n";
  const std::string method = to_string(curve.method);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    os << format_number(curve.grid[i]) << ',' << format_number(curve.psi[i]);
    for (int c = 0; c < curve.m.cols(); ++c) os << ',' << format_number(curve.m(static_cast<Eigen::Index>(i), c));
    os << ',' << method << '\n';
  }
}

void write_estimate_csv_header(std::ostream& os) {
  os << "target,x0,mean,std_error,n_paths,n_ruined,n_escaped,n_censored,n_killed,max_time\n";
}

void write_estimate_csv_row(std::ostream& os, const PassageEstimate& est, double x0) {
  os << est.target << ',' << format_number(x0) << ',' << format_number(est.mean) << ',' << format_number(est.std_error)
     << ',' << est.n_paths << ',' << est.n_ruined << ',' << est.n_escaped << ',' << est.n_censored << ','
     << est.n_killed << ',' << format_number(est.max_time) << '\n';
}

}  // namespace pdruin
