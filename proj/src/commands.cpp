#include "pdruin/commands.hpp"

#include "pdruin/errors.hpp"
#include "pdruin/lie_algebra.hpp"
#include "pdruin/passage_model.hpp"
#include "pdruin/riccati.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pdruin {

namespace {

enum class ClosedForm { none, constant_drift, phi_k, quadrature_q0 };

ClosedForm closed_form_kind(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid,
                            std::string& reason) {
  if (problem.overshoot_xi != 0.0) {
    reason = "the overshoot penalty has no closed form";
    return ClosedForm::none;
  }
  if (!model.jumps.is_exponential()) {
    reason = "jumps are not exponential (n > 1)";
    return ClosedForm::none;
  }
  if (model.direction != JumpDirection::downward) {
    reason = "upward jumps";
    return ClosedForm::none;
  }
  if (!problem.one_sided() || problem.estimand != Estimand::ruin_below) {
    reason = "only the one-sided ruin problem has closed forms";
    return ClosedForm::none;
  }
  const auto& d = model.drift;
  if (d.is_constant()) {
    if (std::get<DriftSpec::Constant>(d.kind()).c > 0.0) return ClosedForm::constant_drift;
    reason = "constant drift is not positive";
    return ClosedForm::none;
  }
  if (d.is_phi_k()) {
    const auto& s = std::get<DriftSpec::PhiKFamily>(d.kind());
    if (!(s.K < 1.0)) {
      reason = "phi_K closed form needs K < 1";
      return ClosedForm::none;
    }
    if (problem.lower != 0.0 || grid.front() < 0.0) {
      reason = "phi_K closed form is normalized at l = 0 and needs x >= 0";
      return ClosedForm::none;
    }
    const auto as = integrability_test(to_riccati(model), chebyshev_grid(grid.front(), std::max(grid.back(), grid.front() + 1.0)));
    if (!as.integrable) {
      reason = "integrability test failed (max deviation " + format_number(as.max_deviation) + ")";
      return ClosedForm::none;
    }
    return ClosedForm::phi_k;
  }
  if (model.kill_rate == 0.0 && d.sign_on(problem.lower, std::max(grid.back(), problem.lower + 1.0)) > 0)
    return ClosedForm::quadrature_q0;
  if (model.kill_rate != 0.0) {
    const auto as = integrability_test(to_riccati(model), chebyshev_grid(grid.front(), grid.back()));
    reason = as.integrable ? "integrable drift, but no closed-form solution is implemented for it"
                           : "integrability test failed (max deviation " + format_number(as.max_deviation) + ")";
  } else {
    reason = "q = 0 quadrature formula needs a positive drift";
  }
  return ClosedForm::none;
}

std::string riccati_reason(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid) {
  if (problem.overshoot_xi != 0.0) return "the overshoot penalty is Monte Carlo only";
  if (!model.jumps.is_exponential()) return "jumps are not exponential (n > 1)";
  if (model.direction != JumpDirection::downward) return "upward jumps";
  if (!problem.one_sided() || problem.estimand != Estimand::ruin_below) return "needs the one-sided ruin problem";
  if (model.drift.sign_on(problem.lower, grid.back()) >= 0)
    return "eta(l) = 1 is only known when the drift points at l";
  return {};
}

std::string bvp_reason(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid) {
  if (problem.overshoot_xi != 0.0) return "the overshoot penalty is Monte Carlo only";
  if (model.direction == JumpDirection::upward && problem.one_sided())
    return "upward jumps on a half-line are not supported";
  const double right = problem.one_sided() ? grid.back() : problem.upper;
  if (model.drift.sign_on(problem.lower, right) == 0) return "drift changes sign or vanishes on [l, L]";
  return {};
}

void check_grid(const PassageProblem& problem, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  if (grid.front() < problem.lower || grid.back() > problem.upper) throw std::invalid_argument("grid leaves [l, L]");
}

SolutionCurve empty_curve(const std::vector<double>& grid, int n, Method method) {
  SolutionCurve c;
  c.grid = grid;
  c.psi.resize(grid.size());
  c.m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), n);
  c.method = method;
  return c;
}

SolutionCurve closed_form_curve(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid) {
  std::string reason;
  const ClosedForm kind = closed_form_kind(model, problem, grid, reason);
  if (kind == ClosedForm::none) throw std::invalid_argument("closed form not applicable: " + reason);
  SolutionCurve c = empty_curve(grid, 1, Method::closed_form);
  std::optional<QuadratureQ0Solution> q0;
  if (kind == ClosedForm::quadrature_q0) q0.emplace(model, problem.lower, grid.back());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    PsiM v;
    switch (kind) {
      case ClosedForm::constant_drift: v = constant_drift_solution(model, grid[i], problem.lower); break;
      case ClosedForm::phi_k: {
        const auto& s = std::get<DriftSpec::PhiKFamily>(model.drift.kind());
        v = phi_k_closed_form(s.K, s.lambda, s.q, s.mu, grid[i]);
        break;
      }
      case ClosedForm::quadrature_q0: v = (*q0)(grid[i]); break;
      case ClosedForm::none: break;
    }
    c.psi[i] = v.psi;
    c.m(static_cast<Eigen::Index>(i), 0) = v.m;
  }
  return c;
}

SolutionCurve riccati_curve(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid) {
  const std::string reason = riccati_reason(model, problem, grid);
  if (!reason.empty()) throw std::invalid_argument("riccati_numeric not applicable: " + reason);
  const auto sol = riccati_numeric(to_riccati(model), 1.0, problem.lower, grid.back());
  SolutionCurve c = empty_curve(grid, 1, Method::riccati_numeric);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PsiM v = sol.reconstruct(grid[i]);
    c.psi[i] = v.psi;
    c.m(static_cast<Eigen::Index>(i), 0) = v.m;
  }
  return c;
}

std::vector<std::size_t> mc_indices(std::size_t n, int wanted) {
  std::vector<std::size_t> idx;
  if (wanted <= 0 || n == 0) return idx;
  if (static_cast<std::size_t>(wanted) >= n || wanted == 1) {
    if (wanted == 1) return {0};
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (int k = 0; k < wanted; ++k) {
    const auto i = static_cast<std::size_t>(std::lround(static_cast<double>(k) * static_cast<double>(n - 1) / (wanted - 1)));
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  return idx;
}

}  // namespace

std::vector<Gate> method_gates(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid) {
  check_grid(problem, grid);
  std::vector<Gate> gates;
  std::string reason;
  const bool cf = closed_form_kind(model, problem, grid, reason) != ClosedForm::none;
  gates.push_back({Method::closed_form, cf, cf ? "" : reason});
  reason = bvp_reason(model, problem, grid);
  gates.push_back({Method::ode_bvp, reason.empty(), reason});
  reason = riccati_reason(model, problem, grid);
  gates.push_back({Method::riccati_numeric, reason.empty(), reason});
  gates.push_back({Method::monte_carlo, true, ""});
  return gates;
}

SolutionCurve solve_with(Method method, const ModelSpec& model, const PassageProblem& problem,
                         const std::vector<double>& grid) {
  model.validate();
  problem.validate();
  check_grid(problem, grid);
  switch (method) {
    case Method::closed_form: return closed_form_curve(model, problem, grid);
    case Method::ode_bvp: {
      const std::string reason = bvp_reason(model, problem, grid);
      if (!reason.empty()) throw std::invalid_argument("ode_bvp not applicable: " + reason);
      return solve_bvp(model, problem, grid);
    }
    case Method::riccati_numeric: return riccati_curve(model, problem, grid);
    case Method::monte_carlo: break;
  }
  throw std::invalid_argument("monte_carlo does not produce a deterministic curve");
}

SolutionCurve solve_dispatch(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid) {
  const auto gates = method_gates(model, problem, grid);
  if (gates[0].applicable) return solve_with(Method::closed_form, model, problem, grid);
  if (gates[1].applicable) return solve_with(Method::ode_bvp, model, problem, grid);
  std::string msg = "no applicable method:";
  for (const auto& g : gates) {
    if (g.method == Method::monte_carlo || g.method == Method::riccati_numeric) continue;
    msg += " " + to_string(g.method) + " (" + g.reason + ");";
  }
  msg += " use 'simulate' for a Monte Carlo estimate";
  throw std::invalid_argument(msg);
}

SimConfig make_sim_config(const RunConfig& cfg, double x0) {
  SimConfig s;
  s.model = cfg.model;
  s.problem = cfg.problem;
  s.x0 = x0;
  s.n_paths = cfg.simulation.paths;
  s.seed = cfg.simulation.seed;
  s.max_time = cfg.simulation.max_time;
  s.flow_tolerance = cfg.simulation.flow_tolerance;
  s.killing = cfg.simulation.killing;
  s.threads = cfg.simulation.threads;
  return s;
}

Comparison compare_methods(const RunConfig& cfg) {
  const auto grid = cfg.grid.points_vector();
  const auto gates = method_gates(cfg.model, cfg.problem, grid);
  Comparison cmp;
  bool want_mc = false;
  for (const auto& g : gates) {
    if (!g.applicable) continue;
    if (std::find(cfg.compare.methods.begin(), cfg.compare.methods.end(), g.method) == cfg.compare.methods.end())
      continue;
    if (g.method == Method::monte_carlo) want_mc = cfg.compare.mc_points > 0;
    else cmp.methods.push_back(g.method);
  }
  if (cmp.methods.size() + (want_mc ? 1 : 0) < 2) throw std::invalid_argument("nothing to compare");

  std::vector<SolutionCurve> curves;
  for (Method m : cmp.methods) curves.push_back(solve_with(m, cfg.model, cfg.problem, grid));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ComparisonRow row;
    row.x = grid[i];
    for (const auto& c : curves) row.values.push_back(c.psi[i]);
    for (std::size_t a = 0; a < row.values.size(); ++a)
      for (std::size_t b = a + 1; b < row.values.size(); ++b)
        cmp.max_discrepancy = std::max(cmp.max_discrepancy, std::abs(row.values[a] - row.values[b]));
    cmp.rows.push_back(row);
  }
  if (want_mc) {
    for (std::size_t i : mc_indices(grid.size(), cfg.compare.mc_points)) {
      const auto est = estimate(make_sim_config(cfg, grid[i]));
      auto& row = cmp.rows[i];
      row.has_mc = true;
      row.mc_mean = est.mean;
      row.mc_std_error = est.std_error;
      if (!row.values.empty()) {
        row.in_band = std::abs(row.values.front() - est.mean) <= 3.0 * est.std_error + 1e-12;
        if (!row.in_band) ++cmp.out_of_band;
      }
      ++cmp.mc_points;
    }
  }
  cmp.passed = cmp.out_of_band <= 0.01 * cmp.mc_points;
  return cmp;
}

namespace {

struct Flags {
  std::string config;
  std::optional<std::int64_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> max_time;
  std::string output;
  std::string format;
  bool quiet = false;
  std::string emit_config;
};

class Session {
 public:
  Session(const Flags& flags, std::ostream& out) : flags_(flags), out_(out) {}

  RunConfig load(bool config_required) {
    RunConfig cfg;
    if (!flags_.config.empty()) cfg = load_config(flags_.config);
    else if (config_required) throw ConfigError("--config is required for this subcommand");
    else cfg = figure1_config();
    if (flags_.paths) {
      if (*flags_.paths < 1) throw ConfigError("--paths must be >= 1");
      cfg.simulation.paths = *flags_.paths;
    }
    if (flags_.seed) cfg.simulation.seed = *flags_.seed;
    if (flags_.max_time) {
      if (!(*flags_.max_time > 0.0)) throw ConfigError("--max-time must be positive");
      cfg.simulation.max_time = *flags_.max_time;
    }
    if (!flags_.format.empty()) cfg.output.format = flags_.format;
    if (!flags_.output.empty()) cfg.output.directory = flags_.output;
    if (!flags_.emit_config.empty()) {
      std::ofstream os(flags_.emit_config, std::ios::binary);
      if (!os) throw ConfigError("cannot write '" + flags_.emit_config + "'");
      os << dump_config(cfg);
    }
    return cfg;
  }

  std::filesystem::path output_path(const RunConfig& cfg, const std::string& stem) const {
    std::string dir = cfg.output.directory;
    if (dir.empty()) {
      const char* env = std::getenv("PDRUIN_OUTPUT_DIR");
      dir = env && *env ? env : ".";
    }
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / (cfg.output.prefix + "_" + stem + (cfg.output.format == "json" ? ".json" : ".csv"));
  }

  std::ostream& say() { return flags_.quiet ? null_ : out_; }

  static std::ofstream open(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    return os;
  }

 private:
  const Flags& flags_;
  std::ostream& out_;
  std::ostringstream null_;
};

void print_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r) {
    os << "    [";
    for (int c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << std::setw(10) << format_number(std::abs(m(r, c)) < 1e-14 ? 0.0 : m(r, c));
    os << "]\n";
  }
}

int cmd_check_solvability(Session& s) {
  const RunConfig cfg = s.load(true);
  const Generators g = build_generators(cfg.model);
  const ClosureReport rep = closure({g.t1, g.t2});
  if (cfg.output.format == "json") {
    s.say() << to_json(rep).dump(2) << "\n";
    return exit_ok;
  }
  auto& os = s.say();
  os << "dimension " << rep.dimension << ", " << (rep.solvable ? "solvable" : "non-solvable");
  const int n1 = cfg.model.phases() + 1;
  if (rep.dimension == n1 * n1) os << " (gl(" << n1 << ",R))";
  os << "\n";
  os << "closed: " << (rep.closed ? "yes" : "no") << "\n";
  os << "derived series dimensions:";
  for (int d : rep.derived_series_dims) os << ' ' << d;
  os << "\n";
  if (cfg.model.jumps.is_exponential()) {
    os << "classification: "
       << (cfg.model.kill_rate == 0.0 ? "q = 0, two-dimensional solvable algebra expected"
                                      : "q > 0, gl(2,R) expected (non-solvable)")
       << "\n";
  } else {
    os << "classification: no reference value for n = " << cfg.model.phases() << "\n";
  }
  if (cfg.model.drift.is_constant())
    os << "note: constant drift makes the system autonomous; its solutions only need span{A}\n";
  for (const auto& note : rep.notes) os << "note: " << note << "\n";
  os << "basis (Frobenius-orthonormal):\n";
  for (std::size_t i = 0; i < rep.basis.size(); ++i) {
    os << "  E" << (i + 1) << " =\n";
    print_matrix(os, rep.basis[i]);
  }
  return exit_ok;
}

int cmd_check_integrability(Session& s) {
  const RunConfig cfg = s.load(true);
  const auto res = integrability_test(to_riccati(cfg.model), chebyshev_grid(cfg.grid.from, cfg.grid.to));
  if (cfg.output.format == "json") {
    s.say() << to_json(res).dump(2) << "\n";
    return exit_ok;
  }
  auto& os = s.say();
  os << (res.integrable ? "integrable" : "not integrable") << " on [" << format_number(cfg.grid.from) << ", "
     << format_number(cfg.grid.to) << "]\n";
  os << "test function: mean " << format_number(res.params.c1 * res.params.kappa) << ", max deviation "
     << format_number(res.max_deviation) << " at x = " << format_number(res.witness_x) << ", scale "
     << format_number(res.scale) << "\n";
  os << "c0 = " << format_number(res.params.c0) << ", c1 = " << format_number(res.params.c1)
     << ", c2 = " << format_number(res.params.c2) << ", kappa = " << res.params.kappa << "\n";
  return exit_ok;
}

void write_curve(Session& s, const RunConfig& cfg, const SolutionCurve& curve, const std::string& stem) {
  const auto path = s.output_path(cfg, stem);
  auto os = Session::open(path);
  if (cfg.output.format == "json") os << to_json(curve).dump(2) << "\n";
  else write_csv(os, curve);
  s.say() << "wrote " << path.string() << " (" << curve.size() << " points, method " << to_string(curve.method) << ")\n";
}

int cmd_solve(Session& s) {
  const RunConfig cfg = s.load(true);
  const auto grid = cfg.grid.points_vector();
  const auto curve = solve_dispatch(cfg.model, cfg.problem, grid);
  auto& os = s.say();
  os << "method: " << to_string(curve.method) << "\n";
  const std::size_t step = std::max<std::size_t>(1, curve.size() / 10);
  for (std::size_t i = 0; i < curve.size(); i += step)
    os << "  x = " << std::setw(8) << format_number(curve.grid[i]) << "  psi = " << format_number(curve.psi[i]) << "\n";
  write_curve(s, cfg, curve, "solve");
  return exit_ok;
}

int cmd_simulate(Session& s) {
  const RunConfig cfg = s.load(true);
  const double x0 = cfg.simulation.x0;
  const auto est = estimate(make_sim_config(cfg, x0));
  const auto path = s.output_path(cfg, "simulate");
  {
    auto os = Session::open(path);
    if (cfg.output.format == "json") {
      os << to_json(est, x0).dump(2) << "\n";
    } else {
      write_estimate_csv_header(os);
      write_estimate_csv_row(os, est, x0);
    }
  }
  auto& os = s.say();
  os << est.target << "(" << format_number(x0) << ") = " << format_number(est.mean) << " +- "
     << format_number(est.std_error) << " (" << est.n_paths << " paths: " << est.n_ruined << " ruined, "
     << est.n_escaped << " escaped, " << est.n_censored << " censored";
  if (est.n_killed) os << ", " << est.n_killed << " killed";
  os << ")\n";
  if (est.n_censored) os << "censored fraction " << format_number(est.censored_fraction()) << " bounds the bias\n";
  os << "wrote " << path.string() << "\n";
  if (est.all_censored) throw NumericalError("all paths censored; increase --max-time");
  return exit_ok;
}

int cmd_compare(Session& s) {
  const RunConfig cfg = s.load(true);
  const Comparison cmp = compare_methods(cfg);
  const auto path = s.output_path(cfg, "compare");
  {
    auto os = Session::open(path);
    if (cfg.output.format == "json") {
      nlohmann::ordered_json j;
      nlohmann::ordered_json methods = nlohmann::ordered_json::array();
      for (Method m : cmp.methods) methods.push_back(to_string(m));
      j["methods"] = methods;
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& r : cmp.rows) {
        nlohmann::ordered_json row;
        row["x"] = r.x;
        row["psi"] = r.values;
        if (r.has_mc) {
          row["mc_mean"] = r.mc_mean;
          row["mc_std_error"] = r.mc_std_error;
          row["in_band"] = r.in_band;
        }
        rows.push_back(row);
      }
      j["rows"] = rows;
      j["max_discrepancy"] = cmp.max_discrepancy;
      j["out_of_band"] = cmp.out_of_band;
      j["passed"] = cmp.passed;
      os << j.dump(2) << "\n";
    } else {
      os << "x";
      for (Method m : cmp.methods) os << ',' << to_string(m);
      os << ",mc_mean,mc_std_error,in_band\n";
      for (const auto& r : cmp.rows) {
        os << format_number(r.x);
        for (double v : r.values) os << ',' << format_number(v);
        if (r.has_mc) os << ',' << format_number(r.mc_mean) << ',' << format_number(r.mc_std_error) << ',' << (r.in_band ? 1 : 0);
        else os << ",,,";
        os << '\n';
      }
    }
  }
  auto& os = s.say();
  os << "methods:";
  for (Method m : cmp.methods) os << ' ' << to_string(m);
  if (cmp.mc_points) os << " monte_carlo(" << cmp.mc_points << " points)";
  os << "\n";
  for (const auto& r : cmp.rows) {
    if (!r.has_mc && &r != &cmp.rows.front() && &r != &cmp.rows.back()) continue;
    os << "  x = " << std::setw(8) << format_number(r.x);
    for (double v : r.values) os << "  " << std::setw(22) << format_number(v);
    if (r.has_mc) os << "  mc " << format_number(r.mc_mean) << " +- " << format_number(r.mc_std_error) << (r.in_band ? "" : "  OUT");
    os << "\n";
  }
  os << "max discrepancy between deterministic methods: " << format_number(cmp.max_discrepancy) << "\n";
  if (cmp.mc_points) os << "outside 3 sigma: " << cmp.out_of_band << " of " << cmp.mc_points << "\n";
  os << "wrote " << path.string() << "\n";
  return cmp.passed ? exit_ok : exit_comparison;
}

int cmd_figure1(Session& s) {
  RunConfig cfg = s.load(false);
  if (!cfg.model.drift.is_phi_k()) throw ConfigError("figure1 needs a phi_k drift");
  const auto grid = cfg.grid.points_vector();
  const auto curve = solve_with(Method::closed_form, cfg.model, cfg.problem, grid);
  write_curve(s, cfg, curve, "psi_m");

  const auto path = s.output_path(cfg, "drift");
  {
    auto os = Session::open(path);
    if (cfg.output.format == "json") {
      std::vector<double> phi;
      for (double x : grid) phi.push_back(cfg.model.drift(x));
      nlohmann::ordered_json j;
      j["x"] = grid;
      j["phi"] = phi;
      os << j.dump(2) << "\n";
    } else {
      os << "x,phi\n";
      for (double x : grid) os << format_number(x) << ',' << format_number(cfg.model.drift(x)) << '\n';
    }
  }
  auto& os = s.say();
  const auto& p = std::get<DriftSpec::PhiKFamily>(cfg.model.drift.kind());
  os << "psi(0) = " << format_number(curve.psi.front()) << ", M(0) = " << format_number(curve.m(0, 0))
     << ", phi(0) = " << format_number(cfg.model.drift(grid.front())) << "\n";
  const std::size_t n = grid.size();
  if (n >= 2 && curve.psi[n - 2] > 0.0 && curve.psi[n - 1] > 0.0) {
    const double slope = std::log(curve.psi[n - 1] / curve.psi[n - 2]) / (grid[n - 1] - grid[n - 2]);
    os << "log-slope of psi at x = " << format_number(grid.back()) << ": " << format_number(slope)
       << " (asymptotic rate " << format_number(asymptotic_rate(p.lambda, p.q, p.mu)) << ")\n";
  }
  os << "wrote " << path.string() << "\n";
  return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"First-passage and ruin probabilities for piecewise deterministic processes"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&flags](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", flags.config, "JSON run configuration");
    if (config_required) opt->required();
    sub->add_option("--output", flags.output, "output directory (default: PDRUIN_OUTPUT_DIR or .)");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--quiet", flags.quiet, "suppress the human-readable summary");
    sub->add_option("--emit-config", flags.emit_config, "write the effective configuration to this file");
  };
  auto add_sim = [&flags](CLI::App* sub) {
    sub->add_option("--paths", flags.paths, "Monte Carlo path count");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--max-time", flags.max_time, "censoring horizon");
  };

  auto* solv = app.add_subcommand("check-solvability", "Lie closure and solvability of the generators");
  auto* integ = app.add_subcommand("check-integrability", "integrability test of the scalar Riccati equation");
  auto* solve = app.add_subcommand("solve", "deterministic curve (closed form, else boundary value solver)");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate at simulation.x0");
  auto* cmp = app.add_subcommand("compare", "all applicable methods side by side");
  auto* fig = app.add_subcommand("figure1", "phi_K curves for plotting");
  for (auto* sub : {solv, integ, solve, sim, cmp}) add_common(sub, true);
  add_common(fig, false);
  add_sim(sim);
  add_sim(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  Session session(flags, out);
  try {
    if (solv->parsed()) return cmd_check_solvability(session);
    if (integ->parsed()) return cmd_check_integrability(session);
    if (solve->parsed()) return cmd_solve(session);
    if (sim->parsed()) return cmd_simulate(session);
    if (cmp->parsed()) return cmd_compare(session);
    if (fig->parsed()) return cmd_figure1(session);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_usage;
}

}  // namespace pdruin
