#include "pdruin/lie_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace pdruin {

namespace {

double frob_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

std::vector<int> derived_series(const MatrixSpan& algebra, double tol) {
  std::vector<int> dims{algebra.dimension()};
  MatrixSpan current = algebra;
  while (current.dimension() > 0) {
    MatrixSpan next(current.matrix_size());
    const auto& b = current.basis();
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = i + 1; j < b.size(); ++j) next.try_add(commutator(b[i], b[j]), tol);
    dims.push_back(next.dimension());
    if (next.dimension() == current.dimension()) break;  // [g, g] = g from here on
    current = std::move(next);
  }
  return dims;
}

}  // namespace

Eigen::MatrixXd MatrixSpan::residual(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd r = m;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : basis_) r -= frob_dot(e, r) * e;
  return r;
}

bool MatrixSpan::try_add(const Eigen::MatrixXd& m, double threshold) {
  if (m.rows() != n_ || m.cols() != n_) throw std::invalid_argument("MatrixSpan: wrong matrix size");
  if (dimension() >= n_ * n_) return false;
  const Eigen::MatrixXd r = residual(m);
  const double norm = r.norm();
  if (!(norm > threshold)) return false;
  basis_.push_back(r / norm);
  return true;
}

bool MatrixSpan::contains(const Eigen::MatrixXd& m, double tol) const {
  return residual(m).norm() <= tol * std::max(1.0, m.norm());
}

ClosureReport closure(const std::vector<Eigen::MatrixXd>& generators, double tol, int max_dim) {
  if (generators.empty()) throw std::invalid_argument("closure: no generators");
  if (!(tol > 0.0)) throw std::invalid_argument("closure: tolerance must be positive");
  const int n = static_cast<int>(generators.front().rows());
  for (const auto& g : generators)
    if (g.rows() != n || g.cols() != n) throw std::invalid_argument("closure: generators must share a square shape");

  const int full = n * n;
  const int cap = max_dim > 0 ? std::min(max_dim, full) : full;

  ClosureReport rep;
  MatrixSpan span(n);
  std::vector<int> frontier;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const double scale = generators[i].norm();
    if (span.dimension() < cap && scale > 0.0 && span.try_add(generators[i], tol * scale)) {
      frontier.push_back(span.dimension() - 1);
    } else {
      rep.notes.push_back("generator " + std::to_string(i) + " is numerically dependent; dropped");
    }
  }

  // each generation brackets the newest directions against everything known
  while (!frontier.empty() && span.dimension() < cap) {
    std::vector<int> added;
    const std::vector<int> current = frontier;
    for (int i : current) {
      for (int j = 0; j < span.dimension() && span.dimension() < cap; ++j) {
        if (j == i) continue;
        const bool j_in_frontier = std::find(current.begin(), current.end(), j) != current.end();
        if (j_in_frontier && j > i) continue;  // pair handled from the other side
        const auto c = commutator(span.basis()[static_cast<std::size_t>(i)], span.basis()[static_cast<std::size_t>(j)]);
        if (span.try_add(c, tol)) added.push_back(span.dimension() - 1);
      }
      if (span.dimension() >= cap) break;
    }
    if (!added.empty()) ++rep.generations;
    frontier = std::move(added);
  }

  rep.basis = span.basis();
  rep.dimension = span.dimension();
  rep.dimension_cap_reached = rep.dimension >= cap;

  bool closed = true;
  const auto& b = rep.basis;
  for (std::size_t i = 0; i < b.size() && closed; ++i)
    for (std::size_t j = i + 1; j < b.size() && closed; ++j)
      if (span.residual(commutator(b[i], b[j])).norm() > tol) closed = false;
  rep.closed = closed;
  if (rep.dimension_cap_reached) {
    rep.notes.push_back(rep.dimension == full ? "dimension cap n^2 reached: the algebra is gl(n)"
                                              : "dimension cap reached before closure was confirmed");
  }

  if (rep.closed) {
    rep.derived_series_dims = derived_series(span, tol);
    rep.solvable = rep.derived_series_dims.back() == 0;
  }
  return rep;
}

SolvabilityReport is_solvable(const std::vector<Eigen::MatrixXd>& basis, double tol) {
  if (basis.empty()) return {true, {0}};
  const int n = static_cast<int>(basis.front().rows());
  MatrixSpan span(n);
  for (const auto& m : basis) span.try_add(m, tol * std::max(1.0, m.norm()));
  const auto& ob = span.basis();
  for (std::size_t i = 0; i < ob.size(); ++i)
    for (std::size_t j = i + 1; j < ob.size(); ++j)
      if (span.residual(commutator(ob[i], ob[j])).norm() > tol)
        throw std::invalid_argument("is_solvable: not closed under the commutator");
  SolvabilityReport rep;
  rep.derived_series_dims = derived_series(span, tol);
  rep.solvable = rep.derived_series_dims.back() == 0;
  return rep;
}

bool spans_equal(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b, double tol) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  const int n = static_cast<int>(a.front().rows());
  MatrixSpan sa(n), sb(n);
  for (const auto& m : a) sa.try_add(m, tol * std::max(1.0, m.norm()));
  for (const auto& m : b) sb.try_add(m, tol * std::max(1.0, m.norm()));
  for (const auto& m : a)
    if (!sb.contains(m, tol)) return false;
  for (const auto& m : b)
    if (!sa.contains(m, tol)) return false;
  return true;
}

Generators build_generators(const ModelSpec& model) {
  const double lambda = model.jump_rate;
  if (!(lambda > 0.0)) throw std::invalid_argument("build_generators: jump rate must be positive");
  const int n = model.phases();
  Generators g;
  g.t1 = Eigen::MatrixXd::Zero(n + 1, n + 1);
  g.t2 = Eigen::MatrixXd::Zero(n + 1, n + 1);
  g.t1(0, 0) = (lambda + model.kill_rate) / lambda;
  g.t1.block(0, 1, 1, n) = -model.jumps.beta();
  const double sign = model.direction == JumpDirection::downward ? 1.0 : -1.0;
  g.t2.block(1, 0, n, 1) = sign * model.jumps.exit_rates();
  g.t2.block(1, 1, n, n) = sign * model.jumps.sub_generator();
  return g;
}

}  // namespace pdruin
