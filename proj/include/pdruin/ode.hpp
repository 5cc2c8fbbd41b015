#ifndef PDRUIN_ODE_HPP
#define PDRUIN_ODE_HPP

// Dormand-Prince 5(4) integrator with step-size control and the
// fourth-order continuous extension. State is any Eigen column vector.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pdruin {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1000000;
};

enum class OdeStatus { completed, step_underflow, max_steps, aborted };

/// Dense solution of an initial value problem. Steps are stored with their
/// interpolation coefficients, so the solution can be evaluated anywhere in
/// the integrated range.
template <typename State>
class OdeSolution {
 public:
  struct Step {
    double x0;
    double h;
    State r1, r2, r3, r4, r5;
  };

  OdeStatus status = OdeStatus::completed;
  double x_start = 0.0;
  double x_reached = 0.0;
  State y_start;
  State y_reached;
  std::size_t rejected = 0;
  std::vector<Step> steps;

  bool ok() const { return status == OdeStatus::completed; }
  bool forward() const { return x_reached >= x_start; }

  bool covers(double x) const {
    const double lo = std::min(x_start, x_reached);
    const double hi = std::max(x_start, x_reached);
    const double slack = 1e-12 * std::max(1.0, std::abs(hi));
    return x >= lo - slack && x <= hi + slack;
  }

  State operator()(double x) const {
    if (steps.empty()) return y_start;
    if (!covers(x)) throw std::out_of_range("ode solution evaluated outside integrated range");
    // steps are ordered along the integration direction
    const bool fwd = forward();
    auto it = std::lower_bound(steps.begin(), steps.end(), x, [fwd](const Step& s, double v) {
      const double end = s.x0 + s.h;
      return fwd ? end < v : end > v;
    });
    if (it == steps.end()) --it;
    const Step& s = *it;
    const double theta = std::clamp((x - s.x0) / s.h, 0.0, 1.0);
    const double theta1 = 1.0 - theta;
    return s.r1 + theta * (s.r2 + theta1 * (s.r3 + theta * (s.r4 + theta1 * s.r5)));
  }
};

namespace detail {

template <typename State>
double error_norm(const State& err, const State& y0, const State& y1, const OdeOptions& opt) {
  double acc = 0.0;
  const auto n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace detail

/// Integrates y' = rhs(x, y) from x0 to x1 (either direction).
/// `abort_if(x, y)` is checked after every accepted step; returning true stops
/// the integration with status `aborted`.
template <typename State, typename Rhs>
OdeSolution<State> integrate_dopri5(
    Rhs&& rhs, double x0, const State& y0, double x1, const OdeOptions& opt = {},
    const std::function<bool(double, const State&)>& abort_if = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  OdeSolution<State> sol;
  sol.x_start = x0;
  sol.x_reached = x0;
  sol.y_start = y0;
  sol.y_reached = y0;
  if (x1 == x0) return sol;

  const double dir = x1 > x0 ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);
  double x = x0;
  State y = y0;
  State k1 = rhs(x, y);

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic
    const double d0 = detail::error_norm<State>(y, y, y, opt);
    const double dd1 = detail::error_norm<State>(k1, y, y, opt);
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, span);
    State y1 = y + dir * h0 * k1;
    State f1 = rhs(x + dir * h0, y1);
    const double d2 = detail::error_norm<State>(State(f1 - k1), y, y, opt) / h0;
    const double h1 = std::max(d2, dd1) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d2, dd1), 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, opt.max_step, span});

  double fac_old = 1e-4;
  for (std::size_t n = 0;; ++n) {
    if (n >= opt.max_steps) {
      sol.status = OdeStatus::max_steps;
      break;
    }
    const double remaining = std::abs(x1 - x);
    if (remaining <= 1e-14 * std::max(1.0, std::abs(x1))) break;
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(x))) {
      sol.status = OdeStatus::step_underflow;
      break;
    }
    const double hs = dir * h;
    State k2 = rhs(x + c2 * hs, State(y + hs * a21 * k1));
    State k3 = rhs(x + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
    State k4 = rhs(x + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
    State k5 = rhs(x + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    State k6 = rhs(x + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    State y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double x_new = last ? x1 : x + hs;
    State k7 = rhs(x_new, y_new);
    State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::error_norm<State>(err, y, y_new, opt);

    if (!std::isfinite(en)) {
      h *= 0.2;
      ++sol.rejected;
      continue;
    }
    if (en <= 1.0) {
      typename OdeSolution<State>::Step st;
      st.x0 = x;
      st.h = x_new - x;
      const State ydiff = y_new - y;
      const State bspl = st.h * k1 - ydiff;
      st.r1 = y;
      st.r2 = ydiff;
      st.r3 = bspl;
      st.r4 = ydiff - st.h * k7 - bspl;
      st.r5 = st.h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.steps.push_back(std::move(st));

      x = x_new;
      y = y_new;
      k1 = k7;
      sol.x_reached = x;
      sol.y_reached = y;
      if (abort_if && abort_if(x, y)) {
        sol.status = OdeStatus::aborted;
        return sol;
      }
      if (last) break;
      // PI step control
      const double fac = std::clamp(std::pow(en, 0.17) * std::pow(fac_old, -0.04) / 0.9, 0.1, 5.0);
      fac_old = std::max(en, 1e-4);
      h = std::min(h / fac, opt.max_step);
    } else {
      h /= std::min(5.0, std::pow(en, 0.2) / 0.9);
      ++sol.rejected;
    }
  }
  return sol;
}

}  // namespace pdruin

#endif  // PDRUIN_ODE_HPP
