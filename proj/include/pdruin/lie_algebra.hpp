#ifndef PDRUIN_LIE_ALGEBRA_HPP
#define PDRUIN_LIE_ALGEBRA_HPP

// Numerical matrix Lie algebras: span maintenance, closure under the
// commutator, and the derived series. Matrices are handled as vectors of
// length n^2 under the Frobenius inner product.

#include "pdruin/model.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdruin {

/// [A, B] = AB - BA
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> commutator(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("commutator: operands must be square matrices of the same size");
  return a * b - b * a;
}

/// Orthonormal basis of a subspace of n x n matrices, grown by modified
/// Gram-Schmidt with one re-orthogonalization pass.
class MatrixSpan {
 public:
  explicit MatrixSpan(int n) : n_(n) {}

  int matrix_size() const { return n_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  const std::vector<Eigen::MatrixXd>& basis() const { return basis_; }

  /// Component of m orthogonal to the span.
  Eigen::MatrixXd residual(const Eigen::MatrixXd& m) const;

  /// Adds the normalized residual of m if its norm exceeds `threshold`.
  /// Returns true if the dimension grew.
  bool try_add(const Eigen::MatrixXd& m, double threshold);

  bool contains(const Eigen::MatrixXd& m, double tol) const;

 private:
  int n_;
  std::vector<Eigen::MatrixXd> basis_;
};

struct ClosureReport {
  std::vector<Eigen::MatrixXd> basis;  // Frobenius-orthonormal
  int dimension = 0;
  bool closed = false;
  bool solvable = false;
  bool dimension_cap_reached = false;
  std::vector<int> derived_series_dims;
  int generations = 0;
  std::vector<std::string> notes;
};

/// Smallest matrix Lie algebra containing `generators`. A commutator
/// direction is new when its residual against the current span exceeds
/// `tol` relative to the generator scale. The derived series is computed on
/// the result.
ClosureReport closure(const std::vector<Eigen::MatrixXd>& generators, double tol = 1e-9, int max_dim = -1);

struct SolvabilityReport {
  bool solvable = false;
  std::vector<int> derived_series_dims;
};

/// Derived series of span(basis). Throws std::invalid_argument ("not closed")
/// if some commutator of basis elements leaves the span.
SolvabilityReport is_solvable(const std::vector<Eigen::MatrixXd>& basis, double tol = 1e-9);

/// True when each basis element of one span lies in the other within tol.
bool spans_equal(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b, double tol = 1e-9);

/// Pieces of the system matrix A(x) = (lambda / phi(x)) T1 + T2.
struct Generators {
  Eigen::MatrixXd t1;  // top row ((lambda + q) / lambda, -beta), zero below
  Eigen::MatrixXd t2;  // zero top row, lower block (b | B); sign-flipped for upward jumps
};

Generators build_generators(const ModelSpec& model);

}  // namespace pdruin

#endif  // PDRUIN_LIE_ALGEBRA_HPP
