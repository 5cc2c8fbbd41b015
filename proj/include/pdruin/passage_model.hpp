#ifndef PDRUIN_PASSAGE_MODEL_HPP
#define PDRUIN_PASSAGE_MODEL_HPP

#include "pdruin/lie_algebra.hpp"
#include "pdruin/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pdruin {

/// x -> A(x) of the first-passage system (Psi, M)' = A(x) (Psi, M):
///   top row ((lambda + q) / phi(x), -lambda beta / phi(x)), lower block (b | B),
/// lower block negated for upward jumps.
class LinearSystem {
 public:
  explicit LinearSystem(ModelSpec model);

  int dimension() const { return model_.phases() + 1; }
  const ModelSpec& model() const { return model_; }

  /// Throws std::domain_error where phi vanishes or x is outside the drift's
  /// sign domain.
  Eigen::MatrixXd operator()(double x) const;

  Eigen::VectorXd apply(double x, const Eigen::VectorXd& y) const;

 private:
  ModelSpec model_;
  Generators gen_;
};

LinearSystem assemble_system(const ModelSpec& model);

struct ConstantDriftRoot {
  double eta = 0.0;    // smallest positive root
  double other = 0.0;  // remaining root
  bool double_root = false;
};

/// Roots of c mu eta^2 - (c mu + lambda + q) eta + lambda = 0 for exponential
/// jumps and constant drift c > 0.
ConstantDriftRoot constant_drift_root(const ModelSpec& model);

/// M(x) = e^{-(1 - eta) mu (x - l)}, Psi = eta M, with l = `lower`.
PsiM constant_drift_solution(const ModelSpec& model, double x, double lower = 0.0);

/// Undiscounted (q = 0) solution with exponential jumps and arbitrary drift,
/// normalized by M(l) = 1 and decaying at infinity:
///   Z(x) = -mu (x - l) + int_l^x lambda / phi,
///   M(x) = mu (1 - Psi(l)) int_x^inf e^Z,  Psi(x) = (1 - Psi(l)) (mu int_x^inf e^Z - e^{Z(x)}).
/// Throws NumericalError when int e^Z diverges.
class QuadratureQ0Solution {
 public:
  QuadratureQ0Solution(const ModelSpec& model, double lower, double x_max);

  PsiM operator()(double x) const;
  double psi_at_lower() const { return 1.0 - scale_; }
  double exponent(double x) const;        // Z(x)
  double tail_integral(double x) const;   // int_x^inf e^Z

 private:
  double segment(double a, double b) const;  // int_a^b lambda / phi

  ModelSpec model_;
  double lower_ = 0.0;
  double mu_ = 0.0;
  double step_ = 0.25;
  std::vector<double> anchor_z_;     // Z at lower + k step
  std::vector<double> anchor_tail_;  // int from lower + k step to infinity
  double scale_ = 0.0;               // 1 - Psi(l)
};

PsiM quadrature_q0_solution(const ModelSpec& model, double x, double lower = 0.0);

struct BvpOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  double truncation_tol = 1e-8;  // tail left beyond the truncation point on [l, inf)
  double boundary_tol = 1e-8;
  bool estimate_error = true;
};

/// Numerical solution of the passage problem on `grid`.
///
/// Boundary data follow the process: a drift pointing at a boundary creeps
/// through it (Psi fixed there), jumps toward a boundary overshoot it (M fixed
/// there). Finite intervals are solved by linear superposition shooting;
/// pure initial value problems are integrated directly; half-lines with a
/// positive drift use a backward Riccati sweep for the decaying subspace,
/// started at a truncation point placed by the spectral gap of A.
SolutionCurve solve_bvp(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid,
                        const BvpOptions& opts = {});

}  // namespace pdruin

#endif  // PDRUIN_PASSAGE_MODEL_HPP
