#ifndef PDRUIN_PHASE_TYPE_HPP
#define PDRUIN_PHASE_TYPE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pdruin {

using Rng = std::mt19937_64;

/// exp(M t) by scaling and squaring with a Pade kernel. Throws
/// std::overflow_error if the scaling exponent leaves the representable range
/// and std::domain_error for non-finite input.
Eigen::MatrixXd matrix_exp(const Eigen::Ref<const Eigen::MatrixXd>& m, double t = 1.0);

struct ValidationIssue {
  std::string invariant;
  std::string message;
  int row = -1;
  int col = -1;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

/// Jump-size law: absorption time of a Markov chain on n transient phases
/// with initial distribution `beta` and subgenerator `B`. The exit-rate
/// vector b = -B 1 is always derived, never stored independently.
class PhaseType {
 public:
  static constexpr double tolerance = 1e-12;

  PhaseType() = default;
  /// Does not validate; call validate() or use make().
  PhaseType(Eigen::RowVectorXd beta, Eigen::MatrixXd sub_generator);

  /// Validated construction; throws std::invalid_argument with the report summary.
  static PhaseType make(Eigen::RowVectorXd beta, Eigen::MatrixXd sub_generator);
  static PhaseType exponential(double rate);
  static PhaseType erlang(int stages, double rate);

  int size() const { return static_cast<int>(beta_.size()); }
  const Eigen::RowVectorXd& beta() const { return beta_; }
  const Eigen::MatrixXd& sub_generator() const { return b_matrix_; }
  const Eigen::VectorXd& exit_rates() const { return exit_; }

  /// Scalar rate when the law is a single exponential phase.
  bool is_exponential() const { return size() == 1; }
  double exponential_rate() const;

  double mean() const;

 private:
  Eigen::RowVectorXd beta_;
  Eigen::MatrixXd b_matrix_;
  Eigen::VectorXd exit_;
};

ValidationReport validate(const PhaseType& pt);

/// P[C > x] = beta exp(Bx) 1.
double tail(const PhaseType& pt, double x);

/// beta exp(Bx) b.
double density(const PhaseType& pt, double x);

/// One absorption time of the underlying chain, simulated phase by phase.
double sample(const PhaseType& pt, Rng& rng);

}  // namespace pdruin

#endif  // PDRUIN_PHASE_TYPE_HPP
