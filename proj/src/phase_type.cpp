#include "pdruin/phase_type.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pdruin {

Eigen::MatrixXd matrix_exp(const Eigen::Ref<const Eigen::MatrixXd>& m, double t) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  if (!std::isfinite(t) || !m.allFinite()) throw std::domain_error("matrix_exp: non-finite input");
  const Eigen::MatrixXd a = m * t;
  if (a.size() == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  // the Pade-13 kernel is applied to a / 2^s with s ~ log2(norm / 5.37)
  if (norm1 > 0.0 && std::log2(norm1) > 1000.0)
    throw std::overflow_error("matrix_exp: scaling exponent exceeds representable range");
  Eigen::MatrixXd out = a.exp();
  if (!out.allFinite()) throw std::overflow_error("matrix_exp: result overflows");
  return out;
}

std::string ValidationReport::summary() const {
  if (issues.empty()) return "valid";
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    const auto& is = issues[i];
    if (i) os << "; ";
    os << is.invariant << ": " << is.message;
    if (is.row >= 0) {
      os << " at (" << is.row;
      if (is.col >= 0) os << "," << is.col;
      os << ")";
    }
  }
  return os.str();
}

PhaseType::PhaseType(Eigen::RowVectorXd beta, Eigen::MatrixXd sub_generator)
    : beta_(std::move(beta)), b_matrix_(std::move(sub_generator)) {
  if (b_matrix_.rows() == b_matrix_.cols()) exit_ = -b_matrix_.rowwise().sum();
}

PhaseType PhaseType::make(Eigen::RowVectorXd beta, Eigen::MatrixXd sub_generator) {
  PhaseType pt(std::move(beta), std::move(sub_generator));
  const auto report = validate(pt);
  if (!report.ok()) throw std::invalid_argument("invalid phase-type law: " + report.summary());
  return pt;
}

PhaseType PhaseType::exponential(double rate) {
  return make(Eigen::RowVectorXd::Ones(1), Eigen::MatrixXd::Constant(1, 1, -rate));
}

PhaseType PhaseType::erlang(int stages, double rate) {
  if (stages < 1) throw std::invalid_argument("erlang: stages must be >= 1");
  Eigen::RowVectorXd beta = Eigen::RowVectorXd::Zero(stages);
  beta(0) = 1.0;
  Eigen::MatrixXd b = -rate * Eigen::MatrixXd::Identity(stages, stages);
  for (int i = 0; i + 1 < stages; ++i) b(i, i + 1) = rate;
  return make(beta, b);
}

double PhaseType::exponential_rate() const {
  if (!is_exponential()) throw std::logic_error("phase-type law is not a single exponential phase");
  return -b_matrix_(0, 0);
}

double PhaseType::mean() const {
  // E[C] = beta (-B)^{-1} 1
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(size());
  return beta_ * (-b_matrix_).partialPivLu().solve(ones);
}

ValidationReport validate(const PhaseType& pt) {
  ValidationReport rep;
  const auto& beta = pt.beta();
  const auto& b = pt.sub_generator();
  const int n = static_cast<int>(beta.size());
  auto add = [&rep](std::string inv, std::string msg, int r = -1, int c = -1) {
    rep.issues.push_back({std::move(inv), std::move(msg), r, c});
  };

  if (n == 0) {
    add("shape", "empty initial distribution");
    return rep;
  }
  if (b.rows() != n || b.cols() != n) {
    add("shape", "subgenerator must be " + std::to_string(n) + "x" + std::to_string(n));
    return rep;
  }
  if (!beta.allFinite() || !b.allFinite()) {
    add("finite", "entries must be finite");
    return rep;
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        if (!(b(i, i) < 0.0)) add("diagonal", "diagonal must be negative", i, i);
      } else if (b(i, j) < 0.0) {
        add("off_diagonal", "off-diagonal entries must be nonnegative", i, j);
      }
    }
  }

  const Eigen::VectorXd rows = b.rowwise().sum();
  bool some_negative = false;
  for (int i = 0; i < n; ++i) {
    if (rows(i) > PhaseType::tolerance) add("row_sum", "row sums must be nonpositive", i);
    if (rows(i) < -PhaseType::tolerance) some_negative = true;
  }
  if (!some_negative) add("row_sum", "at least one row sum must be strictly negative");

  for (int i = 0; i < n; ++i)
    if (beta(i) < 0.0) add("beta", "initial probabilities must be nonnegative", i);
  if (std::abs(beta.sum() - 1.0) > PhaseType::tolerance) add("beta", "initial probabilities must sum to 1");

  const Eigen::VectorXd exit = pt.exit_rates();
  if (exit.size() != n || (exit + rows).cwiseAbs().maxCoeff() > PhaseType::tolerance)
    add("exit_rates", "b must equal -B 1");
  else
    for (int i = 0; i < n; ++i)
      if (exit(i) < -PhaseType::tolerance) add("exit_rates", "exit rates must be nonnegative", i);

  if (rep.ok()) {
    const Eigen::VectorXcd ev = b.eigenvalues();
    for (int i = 0; i < n; ++i)
      if (!(ev(i).real() < 0.0)) add("spectrum", "eigenvalues must have negative real part", i);
  }
  return rep;
}

double tail(const PhaseType& pt, double x) {
  if (!(x >= 0.0)) throw std::domain_error("tail: x must be nonnegative");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(pt.size());
  const double v = pt.beta() * matrix_exp(pt.sub_generator(), x) * ones;
  return std::clamp(v, 0.0, 1.0);
}

double density(const PhaseType& pt, double x) {
  if (!(x >= 0.0)) throw std::domain_error("density: x must be nonnegative");
  const double v = pt.beta() * matrix_exp(pt.sub_generator(), x) * pt.exit_rates();
  return std::max(v, 0.0);
}

double sample(const PhaseType& pt, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto& beta = pt.beta();
  const auto& b = pt.sub_generator();
  const int n = pt.size();

  auto pick = [&](auto weight, double total) {
    const double u = unif(rng) * total;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += weight(j);
      if (u < acc) return j;
    }
    return n;  // absorption (or rounding at the top end)
  };

  int phase = pick([&](int j) { return beta(j); }, 1.0);
  if (phase == n) {
    // rounding in sum(beta); fall back to the last phase with mass
    for (int j = n - 1; j >= 0; --j)
      if (beta(j) > 0.0) {
        phase = j;
        break;
      }
  }
  double t = 0.0;
  while (phase < n) {
    const double rate = -b(phase, phase);
    t += std::exponential_distribution<double>(rate)(rng);
    const int from = phase;
    phase = pick([&](int j) { return j == from ? 0.0 : b(from, j); }, rate);
  }
  return t;
}

}  // namespace pdruin
