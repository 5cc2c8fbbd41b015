#ifndef PDRUIN_MODEL_HPP
#define PDRUIN_MODEL_HPP

#include "pdruin/drift.hpp"
#include "pdruin/phase_type.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pdruin {

enum class JumpDirection { downward, upward };

/// Piecewise deterministic process: drift between jumps, compound Poisson
/// jumps of rate `jump_rate` with phase-type sizes, exponential killing at
/// rate `kill_rate`.
struct ModelSpec {
  DriftSpec drift;
  double jump_rate = 1.0;
  double kill_rate = 0.0;
  PhaseType jumps;
  JumpDirection direction = JumpDirection::downward;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  int phases() const { return jumps.size(); }
};

enum class Estimand {
  ruin_below,  // tau_l before tau_L and before e_q
  exit_above,  // tau_L before tau_l and before e_q
};

struct PassageProblem {
  double lower = 0.0;
  double upper = infinity;
  Estimand estimand = Estimand::ruin_below;
  double overshoot_xi = 0.0;  // penalty exponent, Monte Carlo only

  void validate() const;
  bool one_sided() const { return upper == infinity; }
};

enum class Method { closed_form, ode_bvp, riccati_numeric, monte_carlo };

/// Sampled (x, Psi(x), M(x)); m has one column per phase.
struct SolutionCurve {
  std::vector<double> grid;
  std::vector<double> psi;
  Eigen::MatrixXd m;
  Method method = Method::closed_form;
  std::vector<double> error_estimate;

  std::size_t size() const { return grid.size(); }
};

struct PsiM {
  double psi = 0.0;
  double m = 0.0;
};

std::string to_string(JumpDirection d);
std::string to_string(Estimand e);
std::string to_string(Method m);
JumpDirection jump_direction_from_string(const std::string& s);
Estimand estimand_from_string(const std::string& s);
Method method_from_string(const std::string& s);

/// Evenly spaced points on [a, b]; `points` >= 2 unless a == b.
std::vector<double> linear_grid(double a, double b, int points);

}  // namespace pdruin

#endif  // PDRUIN_MODEL_HPP
