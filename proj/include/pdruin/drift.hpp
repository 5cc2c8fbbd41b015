#ifndef PDRUIN_DRIFT_HPP
#define PDRUIN_DRIFT_HPP

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pdruin {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -infinity;
  double hi = infinity;
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& o) const { return o.lo >= lo && o.hi <= hi; }
};

/// Deterministic drift x' = phi(x) between jumps.
class DriftSpec {
 public:
  struct Constant {
    double c = 0.0;
  };
  /// phi_K(x) = ((lambda + q) / mu) (K e^{-2 mu x} - 1)
  struct PhiKFamily {
    double K = 0.0;
    double lambda = 0.0;
    double q = 0.0;
    double mu = 0.0;
  };
  enum class Interpolation { linear, cubic };
  /// Values between nodes follow `rule`; outside the nodes the end values
  /// are held constant.
  struct Tabulated {
    std::vector<double> x;
    std::vector<double> phi;
    Interpolation rule = Interpolation::cubic;
    std::vector<double> second;  // natural-spline second derivatives (derived)
  };
  using Kind = std::variant<Constant, PhiKFamily, Tabulated>;

  DriftSpec();  // the zero drift

  static DriftSpec constant(double c);
  /// Throws std::invalid_argument for K = 0 (use constant()) or bad rates.
  static DriftSpec phi_k(double K, double lambda, double q, double mu);
  /// Throws std::invalid_argument if nodes are not strictly increasing or the
  /// interpolant changes sign.
  static DriftSpec tabulated(std::vector<double> x, std::vector<double> phi,
                             Interpolation rule = Interpolation::cubic);

  const Kind& kind() const { return kind_; }
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
  bool is_phi_k() const { return std::holds_alternative<PhiKFamily>(kind_); }
  bool is_tabulated() const { return std::holds_alternative<Tabulated>(kind_); }
  std::string kind_name() const;

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  /// Analytic for constant and phi_K drifts, fourth-order central
  /// differences for tabulated ones.
  double derivative(double x) const;

  /// Largest interval containing 0 (or the whole line) on which phi keeps a
  /// constant nonzero sign. Empty (lo > hi) for the zero drift.
  Interval sign_domain() const { return domain_; }

  /// +1 / -1 if phi has that sign throughout [a, b] (checked on a dense
  /// grid), 0 otherwise.
  int sign_on(double a, double b) const;

  /// Solution of x' = phi(x), x(0) = x0, at time t >= 0.
  double flow(double x0, double t) const;

  /// Exact time for the flow from x0 to reach `level`, +inf if it never does.
  /// nullopt when no closed form exists for this drift kind.
  std::optional<double> exact_hitting_time(double x0, double level) const;

 private:
  explicit DriftSpec(Kind k);
  Kind kind_;
  Interval domain_;
};

}  // namespace pdruin

#endif  // PDRUIN_DRIFT_HPP
