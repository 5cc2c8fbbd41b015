#ifndef PDRUIN_COMMANDS_HPP
#define PDRUIN_COMMANDS_HPP

// Method dispatch and the subcommands behind the pdruin executable.

#include "pdruin/io.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pdruin {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_comparison = 3 };

struct Gate {
  Method method;
  bool applicable = false;
  std::string reason;  // why not, when not applicable
};

/// Applicability of every method for this model / problem / grid.
std::vector<Gate> method_gates(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid);

/// Deterministic curve by a specific method; throws std::invalid_argument
/// when the method's preconditions fail.
SolutionCurve solve_with(Method method, const ModelSpec& model, const PassageProblem& problem,
                         const std::vector<double>& grid);

/// Closed form when available, ode_bvp otherwise. Throws
/// std::invalid_argument listing every failed gate if neither applies.
SolutionCurve solve_dispatch(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid);

SimConfig make_sim_config(const RunConfig& cfg, double x0);

struct ComparisonRow {
  double x = 0.0;
  std::vector<double> values;  // one per deterministic method
  bool has_mc = false;
  double mc_mean = 0.0;
  double mc_std_error = 0.0;
  bool in_band = true;  // reference within mc_mean +- 3 std_error
};

struct Comparison {
  std::vector<Method> methods;  // deterministic methods, reference first
  std::vector<ComparisonRow> rows;
  double max_discrepancy = 0.0;  // max over rows and method pairs
  int mc_points = 0;
  int out_of_band = 0;
  bool passed = true;  // out_of_band <= 1% of mc_points
};

/// Throws std::invalid_argument("nothing to compare") when fewer than two
/// of the requested methods apply.
Comparison compare_methods(const RunConfig& cfg);

/// Entry point of the executable; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdruin

#endif  // PDRUIN_COMMANDS_HPP
