#ifndef PDRUIN_QUADRATURE_HPP
#define PDRUIN_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace pdruin {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kronrod_weights[7];
  double gauss = fc * gauss_weights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = hl * kronrod_nodes[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kronrod_weights[j] * s;
    if (j % 2 == 1) gauss += gauss_weights[j / 2] * s;
  }
  return {a, b, kron * hl, std::abs((kron - gauss) * hl)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
template <typename F>
QuadratureResult integrate_gk(F&& f, double a, double b, double abs_tol = 1e-10,
                              double rel_tol = 1e-12, int max_segments = 2000) {
  QuadratureResult out;
  if (a == b) return out;
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk15(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && segments < max_segments) {
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // re-sum to shed accumulated cancellation in the running totals
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.error = error;
  out.evaluations = 15 * (2 * segments - 1);
  return out;
}

}  // namespace pdruin

#endif  // PDRUIN_QUADRATURE_HPP
