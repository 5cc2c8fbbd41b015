#include "pdruin/drift.hpp"

#include "pdruin/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdruin {

namespace {

double spline_eval(const DriftSpec::Tabulated& t, double x) {
  const auto& xs = t.x;
  const auto& ys = t.phi;
  if (xs.size() == 1 || x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const std::size_t lo = hi - 1;
  const double h = xs[hi] - xs[lo];
  const double a = (xs[hi] - x) / h;
  const double b = (x - xs[lo]) / h;
  double y = a * ys[lo] + b * ys[hi];
  if (t.rule == DriftSpec::Interpolation::cubic)
    y += ((a * a * a - a) * t.second[lo] + (b * b * b - b) * t.second[hi]) * h * h / 6.0;
  return y;
}

std::vector<double> natural_spline(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // tridiagonal solve for interior second derivatives
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double diag = 2.0 * (h0 + h1);
    const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    const double denom = diag - h0 * c[i - 1];
    c[i] = h1 / denom;
    d[i] = (rhs - h0 * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = d[i] - c[i] * m[i + 1];
    if (i == 1) break;
  }
  return m;
}

}  // namespace

DriftSpec::DriftSpec(Kind k) : kind_(std::move(k)) {}

DriftSpec::DriftSpec() : DriftSpec(constant(0.0)) {}

DriftSpec DriftSpec::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("constant drift must be finite");
  DriftSpec d(Constant{c});
  if (c == 0.0) d.domain_ = {1.0, -1.0};
  return d;
}

DriftSpec DriftSpec::phi_k(double K, double lambda, double q, double mu) {
  if (K == 0.0) throw std::invalid_argument("phi_K with K = 0 is a constant drift; use a constant drift");
  if (!(lambda > 0.0) || !(q >= 0.0) || !(mu > 0.0))
    throw std::invalid_argument("phi_K requires lambda > 0, q >= 0, mu > 0");
  DriftSpec d(PhiKFamily{K, lambda, q, mu});
  if (K > 0.0) {
    // phi_K vanishes at ln(K) / (2 mu)
    const double root = std::log(K) / (2.0 * mu);
    d.domain_ = root < 0.0 ? Interval{root, infinity} : Interval{-infinity, root};
    if (root == 0.0) d.domain_ = {0.0, infinity};
  }
  return d;
}

DriftSpec DriftSpec::tabulated(std::vector<double> x, std::vector<double> phi, Interpolation rule) {
  if (x.empty() || x.size() != phi.size())
    throw std::invalid_argument("tabulated drift needs equally many nodes and values");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("tabulated drift nodes must be strictly increasing");
  for (double v : phi)
    if (!std::isfinite(v)) throw std::invalid_argument("tabulated drift values must be finite");
  Tabulated t{std::move(x), std::move(phi), rule, {}};
  t.second = rule == Interpolation::cubic ? natural_spline(t.x, t.phi) : std::vector<double>(t.x.size(), 0.0);
  DriftSpec d(std::move(t));
  const auto& tab = std::get<Tabulated>(d.kind_);
  if (d.sign_on(tab.x.front(), tab.x.back()) == 0)
    throw std::invalid_argument("tabulated drift must keep a constant nonzero sign");
  return d;
}

std::string DriftSpec::kind_name() const {
  switch (kind_.index()) {
    case 0: return "constant";
    case 1: return "phi_k";
    default: return "tabulated";
  }
}

double DriftSpec::value(double x) const {
  return std::visit(
      [x](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return k.c;
        } else if constexpr (std::is_same_v<T, PhiKFamily>) {
          return (k.lambda + k.q) / k.mu * (k.K * std::exp(-2.0 * k.mu * x) - 1.0);
        } else {
          return spline_eval(k, x);
        }
      },
      kind_);
}

double DriftSpec::derivative(double x) const {
  return std::visit(
      [this, x](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, PhiKFamily>) {
          return -2.0 * (k.lambda + k.q) * k.K * std::exp(-2.0 * k.mu * x);
        } else {
          const double h = 1e-3;
          return (-value(x + 2 * h) + 8 * value(x + h) - 8 * value(x - h) + value(x - 2 * h)) / (12 * h);
        }
      },
      kind_);
}

int DriftSpec::sign_on(double a, double b) const {
  if (a > b) std::swap(a, b);
  if (const auto* c = std::get_if<Constant>(&kind_)) return c->c > 0 ? 1 : (c->c < 0 ? -1 : 0);
  if (!domain_.contains(Interval{a, b})) return 0;
  // sample densely; tabulated drifts are clamped outside their nodes
  double lo = a, hi = b;
  if (const auto* t = std::get_if<Tabulated>(&kind_)) {
    lo = std::max(lo, t->x.front());
    hi = std::min(hi, t->x.back());
    if (lo > hi) lo = hi = std::clamp(a, t->x.front(), t->x.back());
  } else {
    if (!std::isfinite(lo)) lo = -50.0;
    if (!std::isfinite(hi)) hi = std::max(lo, 0.0) + 50.0;
  }
  const int samples = 2049;
  int sign = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * i / (samples - 1);
    const double v = value(x);
    const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s == 0) return 0;
    if (sign == 0) sign = s;
    if (s != sign) return 0;
  }
  if (const auto* t = std::get_if<Tabulated>(&kind_)) {
    for (double v : t->phi)
      if ((v > 0 ? 1 : -1) != sign || v == 0.0) return 0;
  }
  return sign;
}

double DriftSpec::flow(double x0, double t) const {
  if (t < 0.0) throw std::invalid_argument("flow: negative time step");
  if (t == 0.0) return x0;
  if (const auto* c = std::get_if<Constant>(&kind_)) return x0 + c->c * t;
  if (const auto* s = std::get_if<PhiKFamily>(&kind_)) {
    // y = e^{2 mu x} satisfies the linear ODE y' = 2 mu a (K - y)
    const double a = (s->lambda + s->q) / s->mu;
    const double k0 = s->K * std::exp(-2.0 * s->mu * x0);
    const double arg = k0 + (1.0 - k0) * std::exp(-2.0 * s->mu * a * t);
    if (arg <= 0.0) return -infinity;
    return x0 + std::log(arg) / (2.0 * s->mu);
  }
  if (value(x0) == 0.0) return x0;
  using V = Eigen::Matrix<double, 1, 1>;
  V y0;
  y0(0) = x0;
  OdeOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-13;
  const auto sol = integrate_dopri5<V>(
      [this](double, const V& y) {
        V d;
        d(0) = value(y(0));
        return d;
      },
      0.0, y0, t, opt);
  if (!sol.ok()) throw std::runtime_error("flow: integration of the drift failed");
  return sol.y_reached(0);
}

std::optional<double> DriftSpec::exact_hitting_time(double x0, double level) const {
  if (x0 == level) return 0.0;
  if (const auto* c = std::get_if<Constant>(&kind_)) {
    const double t = (level - x0) / c->c;
    return (c->c != 0.0 && t >= 0.0) ? t : infinity;
  }
  if (const auto* s = std::get_if<PhiKFamily>(&kind_)) {
    const double a = (s->lambda + s->q) / s->mu;
    const double k0 = s->K * std::exp(-2.0 * s->mu * x0);
    if (k0 == 1.0) return infinity;  // rest point
    const double ratio = (std::exp(2.0 * s->mu * (level - x0)) - k0) / (1.0 - k0);
    if (!(ratio > 0.0) || ratio > 1.0) return infinity;
    return -std::log(ratio) / (2.0 * s->mu * a);
  }
  return std::nullopt;
}

}  // namespace pdruin
