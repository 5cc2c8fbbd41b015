#include "pdruin/riccati.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdruin {

RiccatiCoefficients riccati_coefficients(ScalarFunction phi, ScalarFunction dphi, double lambda, double q,
                                         double mu) {
  if (!(lambda > 0.0) || !(q >= 0.0) || !(mu > 0.0))
    throw std::invalid_argument("riccati coefficients need lambda > 0, q >= 0, mu > 0");
  RiccatiCoefficients c;
  c.mu = mu;
  c.b0 = [phi, lambda](double x) { return -lambda / phi(x); };
  c.b1 = [phi, lambda, q, mu](double x) { return mu + (lambda + q) / phi(x); };
  c.b2 = [mu](double) { return -mu; };
  c.db0 = [phi, dphi, lambda](double x) {
    const double p = phi(x);
    return lambda * dphi(x) / (p * p);
  };
  c.db2 = [](double) { return 0.0; };
  return c;
}

RiccatiCoefficients to_riccati(const ModelSpec& model) {
  if (!model.jumps.is_exponential())
    throw std::invalid_argument("to_riccati: only n = 1 (matrix Riccati equations are not handled)");
  if (model.direction != JumpDirection::downward) throw std::invalid_argument("to_riccati: downward jumps only");
  const DriftSpec drift = model.drift;
  return riccati_coefficients([drift](double x) { return drift(x); }, [drift](double x) { return drift.derivative(x); },
                              model.jump_rate, model.kill_rate, model.jumps.exponential_rate());
}

CanonicalForm canonical_form(const RiccatiCoefficients& coeffs, const ModelSpec& model) {
  const double lambda = model.jump_rate;
  const double q = model.kill_rate;
  const double mu = coeffs.mu;
  CanonicalForm f;
  // (lambda + q) / phi = b1 - mu
  f.z = [b1 = coeffs.b1, mu](double x) { return b1(x) - 2.0 * mu; };
  f.u = [z = f.z, mu, lambda, q](double x) { return q * mu * (z(x) + mu) / (lambda + q); };
  return f;
}

std::vector<double> chebyshev_grid(double a, double b, int points) {
  if (points < 2) throw std::invalid_argument("chebyshev_grid: need at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double t = std::cos(std::numbers::pi * (points - 1 - k) / (points - 1));
    g[static_cast<std::size_t>(k)] = 0.5 * (a + b) + 0.5 * (b - a) * t;
  }
  return g;
}

IntegrabilityResult integrability_test(const RiccatiCoefficients& coeffs, const std::vector<double>& grid,
                                  double rel_tol) {
  if (grid.empty()) throw std::invalid_argument("integrability_test: empty grid");
  IntegrabilityResult res;
  res.grid = grid;
  res.test_function.reserve(grid.size());
  int prod_sign = 0;
  int b0_sign = 0;
  for (double x : grid) {
    const double b0 = coeffs.b0(x);
    const double b1 = coeffs.b1(x);
    const double b2 = coeffs.b2(x);
    if (b0 * b2 == 0.0 || !std::isfinite(b0 * b2)) throw std::domain_error("integrability_test: b0 b2 vanishes on the grid");
    const int ps = b0 * b2 > 0 ? 1 : -1;
    const int s0 = b0 > 0 ? 1 : -1;
    if (prod_sign == 0) {
      prod_sign = ps;
      b0_sign = s0;
    } else if (ps != prod_sign || s0 != b0_sign) {
      throw std::domain_error("integrability_test: coefficients change sign on the grid");
    }
    const double log_b2 = coeffs.db2(x) / b2;
    const double log_b0 = coeffs.db0(x) / b0;
    const double root = std::sqrt(std::abs(b0 * b2));
    res.test_function.push_back((b1 + 0.5 * (log_b2 - log_b0)) / root);
    res.scale = std::max(res.scale, (std::abs(b1) + 0.5 * std::abs(log_b2) + 0.5 * std::abs(log_b0)) / root);
  }
  double mean = 0.0;
  for (double t : res.test_function) mean += t;
  mean /= static_cast<double>(res.test_function.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dev = std::abs(res.test_function[i] - mean);
    if (dev > res.max_deviation) {
      res.max_deviation = dev;
      res.witness_x = grid[i];
    }
  }
  res.integrable = res.max_deviation <= rel_tol * std::max(res.scale, 1e-300);

  auto& p = res.params;
  p.c0 = 1.0;
  p.c2 = static_cast<double>(prod_sign);  // makes b0 b2 / (c0 c2) positive
  p.kappa = b0_sign;
  p.c1 = p.kappa * mean;
  const double c0c2 = p.c0 * p.c2;
  const double c0 = p.c0, c2 = p.c2;
  const int kappa = p.kappa;
  p.D = [b0 = coeffs.b0, b2 = coeffs.b2, c0c2, kappa](double x) { return kappa * std::sqrt(b0(x) * b2(x) / c0c2); };
  p.G = [b0 = coeffs.b0, b2 = coeffs.b2, c0, c2](double x) { return std::sqrt(b2(x) * c0 / (b0(x) * c2)); };
  return res;
}

DriftSpec phi_k_drift(double K, double lambda, double q, double mu) {
  if (K == 0.0) return DriftSpec::constant(-(lambda + q) / mu);
  return DriftSpec::phi_k(K, lambda, q, mu);
}

namespace {

void check_phi_k_regime(double K, double lambda, double q, double mu, double x) {
  if (!(K < 1.0)) throw std::invalid_argument("phi_K closed form: requires K < 1");
  if (K == 0.0) throw std::invalid_argument("phi_K closed form: K = 0 is the constant drift case");
  if (!(lambda > 0.0) || !(q >= 0.0) || !(mu > 0.0))
    throw std::invalid_argument("phi_K closed form: requires lambda > 0, q >= 0, mu > 0");
  if (!(x >= 0.0)) throw std::domain_error("phi_K closed form: requires x >= 0");
}

}  // namespace

double xbar(double x, double K, double lambda, double q, double mu) {
  check_phi_k_regime(K, lambda, q, mu, x);
  const double r = lambda / (lambda + q);
  const double s0 = std::sqrt(1.0 - K);
  const double s = std::sqrt(1.0 - K * std::exp(-2.0 * mu * x));
  return std::sqrt(r) * (mu * x + std::log((1.0 + s) / (1.0 + s0)));
}

double phi_k_k1(double K, double lambda, double q) {
  if (!(K < 1.0)) throw std::invalid_argument("K1: requires K < 1");
  const double sr = std::sqrt(lambda / (lambda + q));
  const double s0 = std::sqrt(1.0 - K);
  return (sr - s0) / (sr + s0);
}

PhiKBranches phi_k_branches(double K, double lambda, double q, double mu, double x) {
  check_phi_k_regime(K, lambda, q, mu, x);
  const double sr = std::sqrt(lambda / (lambda + q));
  const double s = std::sqrt(1.0 - K * std::exp(-2.0 * mu * x));
  const double xb = xbar(x, K, lambda, q, mu);
  const double up = std::exp(xb - mu * x);
  const double down = std::exp(-xb - mu * x);
  return {{sr / s * up, up}, {-sr / s * down, down}};
}

PsiM phi_k_closed_form(double K, double lambda, double q, double mu, double x) {
  check_phi_k_regime(K, lambda, q, mu, x);
  const double k1 = phi_k_k1(K, lambda, q);
  if (k1 == -1.0) throw std::invalid_argument("phi_K closed form: degenerate normalization K1 = -1");
  if (x == 0.0) return {1.0, 1.0};  // normalization, exact
  const double sr = std::sqrt(lambda / (lambda + q));
  const double s = std::sqrt(1.0 - K * std::exp(-2.0 * mu * x));
  const double xb = xbar(x, K, lambda, q, mu);
  const double common = std::exp(xb - mu * x) / (1.0 + k1);
  const double damp = k1 * std::exp(-2.0 * xb);
  return {sr / s * common * (1.0 - damp), common * (1.0 + damp)};
}

double phi_k_eta(double K, double lambda, double q, double mu, double x) {
  check_phi_k_regime(K, lambda, q, mu, x);
  if (x == 0.0) return 1.0;
  const double k1 = phi_k_k1(K, lambda, q);
  const double sr = std::sqrt(lambda / (lambda + q));
  const double s = std::sqrt(1.0 - K * std::exp(-2.0 * mu * x));
  const double damp = k1 * std::exp(-2.0 * xbar(x, K, lambda, q, mu));
  return sr / s * (1.0 - damp) / (1.0 + damp);
}

double asymptotic_rate(double lambda, double q, double mu) {
  if (!(lambda > 0.0) || !(q >= 0.0) || !(mu > 0.0))
    throw std::invalid_argument("asymptotic_rate: requires lambda > 0, q >= 0, mu > 0");
  return mu * (std::sqrt(lambda / (lambda + q)) - 1.0);
}

PsiM RiccatiSolution::reconstruct(double x, double m_start) const {
  const double e = eta(x);
  const double m = m_start * std::exp(mu_ * eta_integral(x) - mu_ * (x - x_start()));
  return {e * m, m};
}

RiccatiSolution riccati_numeric(const RiccatiCoefficients& coeffs, double eta0, double x0, double x1,
                                const RiccatiOptions& opts) {
  using V = Eigen::Vector2d;
  OdeOptions o;
  o.rtol = opts.rtol;
  o.atol = opts.atol;
  o.max_steps = 2000000;
  auto rhs = [&](double x, const V& y) {
    const double e = y(0);
    return V(coeffs.b0(x) + coeffs.b1(x) * e + coeffs.b2(x) * e * e, e);
  };
  const double threshold = opts.blow_up_threshold;
  auto sol = integrate_dopri5<V>(rhs, x0, V(eta0, 0.0), x1, o,
                                 [threshold](double, const V& y) { return !(std::abs(y(0)) < threshold); });
  if (sol.status == OdeStatus::aborted || sol.status == OdeStatus::step_underflow)
    throw RiccatiBlowUp(sol.x_reached, "riccati_numeric: solution blows up near x = " + std::to_string(sol.x_reached));
  if (!sol.ok()) throw NumericalError("riccati_numeric: integration failed");
  return RiccatiSolution(std::move(sol), coeffs.mu);
}

}  // namespace pdruin
