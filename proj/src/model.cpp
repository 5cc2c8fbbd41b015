#include "pdruin/model.hpp"

#include <cmath>
#include <stdexcept>

namespace pdruin {

void ModelSpec::validate() const {
  if (!(jump_rate > 0.0) || !std::isfinite(jump_rate)) throw std::invalid_argument("jump rate must be positive");
  if (!(kill_rate >= 0.0) || !std::isfinite(kill_rate)) throw std::invalid_argument("kill rate must be nonnegative");
  const auto rep = pdruin::validate(jumps);
  if (!rep.ok()) throw std::invalid_argument("invalid jump law: " + rep.summary());
}

void PassageProblem::validate() const {
  if (!(lower < upper)) throw std::invalid_argument("passage problem needs lower < upper");
  if (!std::isfinite(lower)) throw std::invalid_argument("lower level must be finite");
  if (!(overshoot_xi >= 0.0)) throw std::invalid_argument("overshoot exponent must be nonnegative");
  if (estimand == Estimand::exit_above && !std::isfinite(upper))
    throw std::invalid_argument("exit above an infinite level is not a passage problem");
}

std::string to_string(JumpDirection d) { return d == JumpDirection::downward ? "downward" : "upward"; }

std::string to_string(Estimand e) { return e == Estimand::ruin_below ? "ruin_below" : "exit_above"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::ode_bvp: return "ode_bvp";
    case Method::riccati_numeric: return "riccati_numeric";
    case Method::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

JumpDirection jump_direction_from_string(const std::string& s) {
  if (s == "downward") return JumpDirection::downward;
  if (s == "upward") return JumpDirection::upward;
  throw std::invalid_argument("unknown jump direction '" + s + "'");
}

Estimand estimand_from_string(const std::string& s) {
  if (s == "ruin_below") return Estimand::ruin_below;
  if (s == "exit_above") return Estimand::exit_above;
  throw std::invalid_argument("unknown estimand '" + s + "'");
}

Method method_from_string(const std::string& s) {
  if (s == "closed_form") return Method::closed_form;
  if (s == "ode_bvp") return Method::ode_bvp;
  if (s == "riccati_numeric") return Method::riccati_numeric;
  if (s == "monte_carlo") return Method::monte_carlo;
  throw std::invalid_argument("unknown method '" + s + "'");
}

std::vector<double> linear_grid(double a, double b, int points) {
  if (points < 1) throw std::invalid_argument("grid needs at least one point");
  if (points == 1) return {a};
  if (!(b > a)) throw std::invalid_argument("grid must be strictly increasing");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (points - 1);
  g.back() = b;
  return g;
}

}  // namespace pdruin
