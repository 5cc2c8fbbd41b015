#ifndef PDRUIN_RICCATI_HPP
#define PDRUIN_RICCATI_HPP

// Scalar Riccati reduction of the exponential-jump system via eta = Psi / M:
//   eta' = b0 + b1 eta + b2 eta^2,   M' = mu (eta - 1) M,
// with b0 = -lambda / phi, b1 = mu + (lambda + q) / phi, b2 = -mu.

#include "pdruin/errors.hpp"
#include "pdruin/model.hpp"
#include "pdruin/ode.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace pdruin {

using ScalarFunction = std::function<double(double)>;

struct RiccatiCoefficients {
  ScalarFunction b0, b1, b2;
  ScalarFunction db0, db2;  // derivatives, needed by the integrability test
  double mu = 0.0;          // companion rate in M' = mu (eta - 1) M
};

/// Riccati coefficients for an n = 1 model with downward jumps.
RiccatiCoefficients to_riccati(const ModelSpec& model);

/// Same coefficients for an arbitrary drift given with its derivative.
RiccatiCoefficients riccati_coefficients(ScalarFunction phi, ScalarFunction dphi, double lambda, double q, double mu);

/// y = mu (eta - 1) satisfies y' = -y^2 + z y + u, equivalently
/// g'' - z g' - u g = 0 for y = g' / g.
struct CanonicalForm {
  ScalarFunction z;  // (lambda + q) / phi - mu
  ScalarFunction u;  // q mu (z + mu) / (lambda + q)
};

CanonicalForm canonical_form(const RiccatiCoefficients& coeffs, const ModelSpec& model);

struct IntegrabilityParams {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 1.0;
  int kappa = 1;
  ScalarFunction D;  // kappa sqrt(b0 b2 / (c0 c2))
  ScalarFunction G;  // eta_bar = G(x) eta, G = sqrt(b2 c0 / (b0 c2))
};

struct IntegrabilityResult {
  bool integrable = false;
  IntegrabilityParams params;
  std::vector<double> grid;
  std::vector<double> test_function;  // T(x) on the grid
  double max_deviation = 0.0;         // max |T - mean T|
  double scale = 0.0;                 // size of the individual terms of T
  double witness_x = 0.0;             // point of maximal deviation
};

/// 256 Chebyshev points on [a, b] by default.
std::vector<double> chebyshev_grid(double a, double b, int points = 256);

/// Tests whether the Riccati equation maps to dbar/dx = D (c0 + c1 bar + c2 bar^2)
/// under bar = G eta. T(x) = (b1 + (b2'/b2 - b0'/b0) / 2) / sqrt|b0 b2| must be
/// constant; the verdict uses max |T - mean T| <= rel_tol * scale.
IntegrabilityResult integrability_test(const RiccatiCoefficients& coeffs, const std::vector<double>& grid,
                                  double rel_tol = 1e-8);

/// phi_K(x) = ((lambda + q) / mu) (K e^{-2 mu x} - 1). K = 0 yields the
/// constant drift -(lambda + q) / mu.
DriftSpec phi_k_drift(double K, double lambda, double q, double mu);

/// Reparametrized coordinate with d xbar / dx = sqrt(-lambda mu / phi_K(x)),
/// xbar(0) = 0. Evaluated as sqrt(r) (mu x + log((1 + s) / (1 + s0))) with
/// r = lambda / (lambda + q), s = sqrt(1 - K e^{-2 mu x}), s0 = s(0).
double xbar(double x, double K, double lambda, double q, double mu);

/// K1(K) = (sqrt(r) - sqrt(1 - K)) / (sqrt(r) + sqrt(1 - K)).
double phi_k_k1(double K, double lambda, double q);

/// Ruin pair for phi_K drift normalized by Psi(0) = M(0) = 1 (K < 1, x >= 0).
PsiM phi_k_closed_form(double K, double lambda, double q, double mu, double x);

/// eta = Psi / M of the normalized pair.
double phi_k_eta(double K, double lambda, double q, double mu, double x);

/// The two independent solutions of the phi_K system:
/// growing branch (sqrt(r) / s, 1) e^{xbar - mu x} and decaying branch
/// (-sqrt(r) / s, 1) e^{-xbar - mu x}. The normalized pair is
/// (growing + K1 decaying) / (1 + K1).
struct PhiKBranches {
  PsiM growing;
  PsiM decaying;
};
PhiKBranches phi_k_branches(double K, double lambda, double q, double mu, double x);

/// mu (sqrt(lambda / (lambda + q)) - 1), the exponential decay rate of the
/// phi_K ruin pair.
double asymptotic_rate(double lambda, double q, double mu);

class RiccatiBlowUp : public NumericalError {
 public:
  RiccatiBlowUp(double where, const std::string& msg) : NumericalError(msg), location(where) {}
  double location;
};

struct RiccatiOptions {
  double rtol = 1e-11;
  double atol = 1e-12;
  double blow_up_threshold = 1e8;
};

/// Dense solution of eta' = b0 + b1 eta + b2 eta^2 together with int eta.
class RiccatiSolution {
 public:
  RiccatiSolution(OdeSolution<Eigen::Vector2d> sol, double mu) : sol_(std::move(sol)), mu_(mu) {}

  double x_start() const { return sol_.x_start; }
  double x_end() const { return sol_.x_reached; }
  double eta(double x) const { return sol_(x)(0); }
  double eta_integral(double x) const { return sol_(x)(1); }

  /// M(x) = M(x0) exp(mu int eta - mu (x - x0)), Psi = eta M.
  PsiM reconstruct(double x, double m_start = 1.0) const;

  const OdeSolution<Eigen::Vector2d>& ode() const { return sol_; }

 private:
  OdeSolution<Eigen::Vector2d> sol_;
  double mu_;
};

/// Throws RiccatiBlowUp with the location of a finite-x pole.
RiccatiSolution riccati_numeric(const RiccatiCoefficients& coeffs, double eta0, double x0, double x1,
                                const RiccatiOptions& opts = {});

}  // namespace pdruin

#endif  // PDRUIN_RICCATI_HPP
