#include "pdruin/passage_model.hpp"

#include "pdruin/errors.hpp"
#include "pdruin/ode.hpp"
#include "pdruin/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace pdruin {

LinearSystem::LinearSystem(ModelSpec model) : model_(std::move(model)), gen_(build_generators(model_)) {}

Eigen::MatrixXd LinearSystem::operator()(double x) const {
  const double phi = model_.drift(x);
  if (phi == 0.0 || !std::isfinite(phi) || !model_.drift.sign_domain().contains(x))
    throw std::domain_error("system matrix evaluated outside the drift's sign domain");
  return (model_.jump_rate / phi) * gen_.t1 + gen_.t2;
}

Eigen::VectorXd LinearSystem::apply(double x, const Eigen::VectorXd& y) const { return (*this)(x) * y; }

LinearSystem assemble_system(const ModelSpec& model) {
  model.validate();
  return LinearSystem(model);
}

namespace {

void require_exponential_downward(const ModelSpec& model, const char* what) {
  if (!model.jumps.is_exponential())
    throw std::invalid_argument(std::string(what) + " requires exponential jumps (n = 1)");
  if (model.direction != JumpDirection::downward)
    throw std::invalid_argument(std::string(what) + " requires downward jumps");
}

}  // namespace

ConstantDriftRoot constant_drift_root(const ModelSpec& model) {
  require_exponential_downward(model, "constant_drift_solution");
  const auto* k = std::get_if<DriftSpec::Constant>(&model.drift.kind());
  if (!k) throw std::invalid_argument("constant_drift_solution requires a constant drift");
  const double c = k->c;
  if (!(c > 0.0)) throw std::invalid_argument("constant_drift_solution requires a positive drift: misposed problem");
  const double mu = model.jumps.exponential_rate();
  const double lambda = model.jump_rate;
  const double q = model.kill_rate;
  // c mu eta^2 - (c mu + lambda + q) eta + lambda = 0
  const double a = c * mu;
  const double b = -(c * mu + lambda + q);
  const double disc = b * b - 4.0 * a * lambda;
  ConstantDriftRoot r;
  if (disc < 0.0) throw std::invalid_argument("constant_drift_solution: no real root in (0, 1]");
  const double sq = std::sqrt(disc);
  // cancellation-free pair: the larger root from the quadratic formula, the other from the product
  const double big = (-b + sq) / (2.0 * a);
  const double small = lambda / (a * big);
  r.eta = small;
  r.other = big;
  r.double_root = sq <= 1e-12 * std::abs(b);
  if (!(r.eta > 0.0) || r.eta > 1.0 + 1e-12)
    throw std::invalid_argument("constant_drift_solution: no root in (0, 1]");
  r.eta = std::min(r.eta, 1.0);
  return r;
}

PsiM constant_drift_solution(const ModelSpec& model, double x, double lower) {
  if (x < lower) throw std::domain_error("constant_drift_solution: x below the ruin level");
  const auto r = constant_drift_root(model);
  const double mu = model.jumps.exponential_rate();
  const double m = std::exp(-(1.0 - r.eta) * mu * (x - lower));
  return {r.eta * m, m};
}

QuadratureQ0Solution::QuadratureQ0Solution(const ModelSpec& model, double lower, double x_max)
    : model_(model), lower_(lower) {
  require_exponential_downward(model, "quadrature_q0_solution");
  if (model.kill_rate != 0.0) throw std::invalid_argument("quadrature_q0_solution requires q = 0");
  if (model.drift.sign_on(lower, infinity) != 1)
    throw std::invalid_argument("quadrature_q0_solution: drift must be positive on [l, inf)");
  mu_ = model.jumps.exponential_rate();
  const double lambda = model.jump_rate;
  x_max = std::max(x_max, lower);

  auto dz = [&](double x) { return -mu_ + lambda / model_.drift(x); };

  anchor_z_.push_back(0.0);
  const double reach = lower + 4000.0 / mu_;
  double remainder = infinity;
  for (;;) {
    const double a = lower + step_ * static_cast<double>(anchor_z_.size() - 1);
    const double z = anchor_z_.back();
    if (a >= x_max) {
      const double slope = dz(a);
      if (slope < 0.0) {
        remainder = std::exp(z) / -slope;
        if (remainder < 1e-15) break;
      }
    }
    if (a > reach || z > 700.0)
      throw NumericalError("quadrature_q0_solution: int e^Z diverges (Z(inf) is not -inf); formula inapplicable");
    anchor_z_.push_back(z + segment(a, a + step_) - mu_ * step_);
  }

  const std::size_t k = anchor_z_.size();
  anchor_tail_.assign(k, 0.0);
  anchor_tail_[k - 1] = remainder;
  for (std::size_t i = k - 1; i-- > 0;) {
    const double a = lower_ + step_ * static_cast<double>(i);
    const double z0 = anchor_z_[i];
    const auto piece = integrate_gk(
        [&](double v) { return std::exp(z0 + segment(a, v) - mu_ * (v - a)); }, a, a + step_, 1e-15, 1e-14);
    anchor_tail_[i] = anchor_tail_[i + 1] + piece.value;
  }
  scale_ = 1.0 / (mu_ * anchor_tail_[0]);
}

double QuadratureQ0Solution::segment(double a, double b) const {
  if (a == b) return 0.0;
  const double lambda = model_.jump_rate;
  return integrate_gk([&](double v) { return lambda / model_.drift(v); }, a, b, 1e-15, 1e-14).value;
}

double QuadratureQ0Solution::exponent(double x) const {
  if (x < lower_) throw std::domain_error("quadrature_q0_solution: x below the ruin level");
  const auto k = static_cast<std::size_t>(std::floor((x - lower_) / step_));
  if (k + 1 >= anchor_z_.size()) throw std::out_of_range("quadrature_q0_solution: x beyond the prepared range");
  const double a = lower_ + step_ * static_cast<double>(k);
  return anchor_z_[k] + segment(a, x) - mu_ * (x - a);
}

double QuadratureQ0Solution::tail_integral(double x) const {
  if (x < lower_) throw std::domain_error("quadrature_q0_solution: x below the ruin level");
  const auto k = static_cast<std::size_t>(std::floor((x - lower_) / step_));
  if (k + 1 >= anchor_z_.size()) throw std::out_of_range("quadrature_q0_solution: x beyond the prepared range");
  const double a = lower_ + step_ * static_cast<double>(k);
  const double b = a + step_;
  const double zx = exponent(x);
  const auto piece =
      integrate_gk([&](double v) { return std::exp(zx + segment(x, v) - mu_ * (v - x)); }, x, b, 1e-15, 1e-14);
  return piece.value + anchor_tail_[k + 1];
}

PsiM QuadratureQ0Solution::operator()(double x) const {
  const double tail = tail_integral(x);
  const double ez = std::exp(exponent(x));
  return {scale_ * (mu_ * tail - ez), scale_ * mu_ * tail};
}

PsiM quadrature_q0_solution(const ModelSpec& model, double x, double lower) {
  return QuadratureQ0Solution(model, lower, x)(x);
}

// ---------------------------------------------------------------------------

namespace {

using Vec = Eigen::VectorXd;

struct BoundaryData {
  std::vector<int> left_index, right_index;
  std::vector<double> left_value, right_value;
};

struct Profile {
  std::vector<double> psi;
  Eigen::MatrixXd m;
};

OdeOptions ode_options(double rtol, double atol) {
  OdeOptions o;
  o.rtol = rtol;
  o.atol = atol;
  o.max_steps = 2000000;
  return o;
}

void fill_row(Profile& p, std::size_t i, const Vec& y) {
  p.psi[i] = y(0);
  p.m.row(static_cast<Eigen::Index>(i)) = y.tail(y.size() - 1).transpose();
}

Profile integrate_ivp(const LinearSystem& sys, double from, const Vec& y0, double to, const std::vector<double>& grid,
                      double rtol, double atol) {
  const auto sol = integrate_dopri5<Vec>([&](double x, const Vec& y) { return sys.apply(x, y); }, from, y0, to,
                                         ode_options(rtol, atol));
  if (!sol.ok()) throw NumericalError("solve_bvp: integration of the linear system failed");
  Profile p{std::vector<double>(grid.size()), Eigen::MatrixXd(grid.size(), sys.dimension() - 1)};
  for (std::size_t i = 0; i < grid.size(); ++i) fill_row(p, i, sol(grid[i]));
  return p;
}

// Unknowns at the left end are the components without left data; the
// same number of conditions is imposed at the right end.
Profile superposition(const LinearSystem& sys, const BoundaryData& bd, double l, double L,
                      const std::vector<double>& grid, double rtol, double atol, double bc_tol) {
  const int d = sys.dimension();
  std::vector<int> free;
  for (int i = 0; i < d; ++i)
    if (std::find(bd.left_index.begin(), bd.left_index.end(), i) == bd.left_index.end()) free.push_back(i);
  const int k = static_cast<int>(free.size());
  if (k != static_cast<int>(bd.right_index.size()))
    throw std::logic_error("solve_bvp: boundary data do not match the system dimension");

  // particular solution plus k homogeneous ones, integrated as one block system
  Vec y0 = Vec::Zero(d * (k + 1));
  for (std::size_t i = 0; i < bd.left_index.size(); ++i) y0(bd.left_index[i]) = bd.left_value[i];
  for (int j = 0; j < k; ++j) y0(d * (j + 1) + free[static_cast<std::size_t>(j)]) = 1.0;

  auto rhs = [&](double x, const Vec& y) {
    const Eigen::MatrixXd a = sys(x);
    Vec out(y.size());
    for (int j = 0; j <= k; ++j) out.segment(d * j, d) = a * y.segment(d * j, d);
    return out;
  };
  const auto sol = integrate_dopri5<Vec>(rhs, l, y0, L, ode_options(rtol, atol));
  if (!sol.ok()) throw NumericalError("solve_bvp: shooting integration failed");

  const Vec yl = sol.y_reached;
  Eigen::MatrixXd lhs(k, k);
  Vec rhs_v(k);
  for (int r = 0; r < k; ++r) {
    const int comp = bd.right_index[static_cast<std::size_t>(r)];
    rhs_v(r) = bd.right_value[static_cast<std::size_t>(r)] - yl(comp);
    for (int j = 0; j < k; ++j) lhs(r, j) = yl(d * (j + 1) + comp);
  }
  const Vec s = lhs.fullPivLu().solve(rhs_v);

  auto combine = [&](const Vec& y) {
    Vec out = y.segment(0, d);
    for (int j = 0; j < k; ++j) out += s(j) * y.segment(d * (j + 1), d);
    return out;
  };
  const Vec at_right = combine(yl);
  for (int r = 0; r < k; ++r) {
    const int comp = bd.right_index[static_cast<std::size_t>(r)];
    if (std::abs(at_right(comp) - bd.right_value[static_cast<std::size_t>(r)]) > bc_tol)
      throw NumericalError("solve_bvp: shooting did not meet the right boundary condition");
  }

  Profile p{std::vector<double>(grid.size()), Eigen::MatrixXd(grid.size(), d - 1)};
  for (std::size_t i = 0; i < grid.size(); ++i) fill_row(p, i, combine(sol(grid[i])));
  return p;
}

struct StableGraph {
  Eigen::RowVectorXd eta;  // Psi = eta M on the decaying subspace
  double gap = 0.0;
};

// Decaying subspace of a frozen A, written as the graph Psi = eta M. The
// discarded mode is the one with the largest real part.
StableGraph stable_graph(const Eigen::MatrixXd& a) {
  const int d = static_cast<int>(a.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("solve_bvp: eigen decomposition failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  int worst = 0;
  for (int i = 1; i < d; ++i)
    if (ev(i).real() > ev(worst).real()) worst = i;
  double next = -infinity;
  Eigen::MatrixXcd v(d, d - 1);
  for (int i = 0, c = 0; i < d; ++i) {
    if (i == worst) continue;
    next = std::max(next, ev(i).real());
    v.col(c++) = es.eigenvectors().col(i);
  }
  StableGraph g;
  g.gap = ev(worst).real() - next;
  const Eigen::MatrixXcd lower = v.bottomRows(d - 1);
  const Eigen::RowVectorXcd top = v.row(0);
  const Eigen::RowVectorXcd eta = lower.transpose().fullPivLu().solve(top.transpose()).transpose();
  g.eta = eta.real();
  return g;
}

Profile riccati_sweep(const LinearSystem& sys, double l, double m_left, const std::vector<double>& grid, double rtol,
                      double atol, double truncation_tol) {
  const int d = sys.dimension();
  const int n = d - 1;
  const double x_end = std::max(grid.back(), l);
  const auto probe = stable_graph(sys(x_end));
  if (!(probe.gap > 1e-12))
    throw NumericalError("solve_bvp: truncation certificate failure (no spectral gap at the far end)");
  const double x_max = x_end + std::log(1.0 / truncation_tol) / probe.gap;
  const auto terminal = stable_graph(sys(x_max));
  if (!(terminal.gap > 1e-12))
    throw NumericalError("solve_bvp: truncation certificate failure (no spectral gap at the truncation point)");

  // eta' = c + a eta - eta B - (eta b) eta, with A = [[a, c], [b, B]]
  auto eta_rhs = [&](double x, const Vec& eta) {
    const Eigen::MatrixXd A = sys(x);
    const double a = A(0, 0);
    const Eigen::RowVectorXd c = A.block(0, 1, 1, n);
    const Eigen::VectorXd b = A.block(1, 0, n, 1);
    const Eigen::MatrixXd B = A.block(1, 1, n, n);
    const Eigen::RowVectorXd e = eta.transpose();
    const Eigen::RowVectorXd de = c + a * e - e * B - (e * b)(0, 0) * e;
    return Vec(de.transpose());
  };
  const auto eta_sol = integrate_dopri5<Vec>(eta_rhs, x_max, Vec(terminal.eta.transpose()), l, ode_options(rtol, atol));
  if (!eta_sol.ok()) throw NumericalError("solve_bvp: backward Riccati sweep failed");

  auto m_rhs = [&](double x, const Vec& m) {
    const Eigen::MatrixXd A = sys(x);
    const Eigen::VectorXd b = A.block(1, 0, n, 1);
    const Eigen::MatrixXd B = A.block(1, 1, n, n);
    const Eigen::RowVectorXd e = eta_sol(x).transpose();
    return Vec((b * e + B) * m);
  };
  const auto m_sol = integrate_dopri5<Vec>(m_rhs, l, Vec::Constant(n, m_left), x_end, ode_options(rtol, atol));
  if (!m_sol.ok()) throw NumericalError("solve_bvp: forward sweep for M failed");

  Profile p{std::vector<double>(grid.size()), Eigen::MatrixXd(grid.size(), n)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec m = m_sol(grid[i]);
    const Vec e = eta_sol(grid[i]);
    p.psi[i] = e.dot(m);
    p.m.row(static_cast<Eigen::Index>(i)) = m.transpose();
  }
  return p;
}

}  // namespace

SolutionCurve solve_bvp(const ModelSpec& model, const PassageProblem& problem, const std::vector<double>& grid,
                        const BvpOptions& opts) {
  model.validate();
  if (problem.lower == problem.upper) throw std::invalid_argument("solve_bvp: degenerate interval l = L");
  problem.validate();
  if (problem.overshoot_xi != 0.0)
    throw std::invalid_argument("solve_bvp: the overshoot penalty is handled by the Monte Carlo estimator only");
  if (grid.empty()) throw std::invalid_argument("solve_bvp: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("solve_bvp: grid must be strictly increasing");
  const double l = problem.lower;
  const double L = problem.upper;
  if (grid.front() < l || grid.back() > L) throw std::invalid_argument("solve_bvp: grid leaves [l, L]");

  const int sign = model.drift.sign_on(l, L);
  if (sign == 0) throw std::invalid_argument("solve_bvp: drift must keep a constant nonzero sign on [l, L]");

  const LinearSystem sys(model);
  const int d = sys.dimension();
  const double below = problem.estimand == Estimand::ruin_below ? 1.0 : 0.0;
  const double above = 1.0 - below;
  const bool down = model.direction == JumpDirection::downward;

  BoundaryData bd;
  if (sign < 0) {
    bd.left_index.push_back(0);
    bd.left_value.push_back(below);
  } else if (!problem.one_sided()) {
    bd.right_index.push_back(0);
    bd.right_value.push_back(above);
  }
  for (int i = 1; i < d; ++i) {
    if (down) {
      bd.left_index.push_back(i);
      bd.left_value.push_back(below);
    } else if (!problem.one_sided()) {
      bd.right_index.push_back(i);
      bd.right_value.push_back(above);
    }
  }

  auto run = [&](double rtol, double atol) -> Profile {
    if (static_cast<int>(bd.left_index.size()) == d) {
      Vec y0(d);
      for (int i = 0; i < d; ++i) y0(bd.left_index[static_cast<std::size_t>(i)]) = bd.left_value[static_cast<std::size_t>(i)];
      return integrate_ivp(sys, l, y0, grid.back(), grid, rtol, atol);
    }
    if (!problem.one_sided()) {
      if (static_cast<int>(bd.right_index.size()) == d) {
        Vec y0(d);
        for (int i = 0; i < d; ++i)
          y0(bd.right_index[static_cast<std::size_t>(i)]) = bd.right_value[static_cast<std::size_t>(i)];
        return integrate_ivp(sys, L, y0, grid.front(), grid, rtol, atol);
      }
      return superposition(sys, bd, l, L, grid, rtol, atol, opts.boundary_tol);
    }
    if (down && sign > 0) return riccati_sweep(sys, l, below, grid, rtol, atol, opts.truncation_tol);
    throw std::invalid_argument("solve_bvp: upward jumps on a half-line are not supported");
  };

  const Profile main = run(opts.rtol, opts.atol);
  SolutionCurve curve;
  curve.grid = grid;
  curve.psi = main.psi;
  curve.m = main.m;
  curve.method = Method::ode_bvp;
  curve.error_estimate.assign(grid.size(), 0.0);
  if (opts.estimate_error) {
    const Profile loose = run(opts.rtol * 1e3, opts.atol * 1e3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double e = std::abs(loose.psi[i] - main.psi[i]);
      e = std::max(e, (loose.m.row(static_cast<Eigen::Index>(i)) - main.m.row(static_cast<Eigen::Index>(i)))
                          .cwiseAbs()
                          .maxCoeff());
      curve.error_estimate[i] = e;
    }
  }
  return curve;
}

}  // namespace pdruin
