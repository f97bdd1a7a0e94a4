#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace distsynth {

namespace detail {

// 15-point Kronrod nodes/weights and the embedded 7-point Gauss weights
// (QUADPACK values). Nodes are abscissae on [-1,1], symmetric about 0.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
std::pair<double, double> gauss_kronrod_15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace detail

// Adaptive integral of f over [a,b] to absolute tolerance abs_tol, by
// recursive bisection with a G7/K15 error estimate per panel. Throws if the
// tolerance is not met within the subdivision budget.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12) {
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return 0.0;

  struct Panel {
    double a, b, value, error;
  };
  constexpr std::size_t kMaxPanels = 4096;
  Panel stack[64];
  std::size_t depth = 0;

  auto eval = [&](double lo, double hi) {
    auto [v, e] = detail::gauss_kronrod_15(f, lo, hi);
    return Panel{lo, hi, v, e};
  };

  double total = 0.0;
  std::size_t panels = 0;
  stack[depth++] = eval(a, b);
  while (depth > 0) {
    const Panel p = stack[--depth];
    if (++panels > kMaxPanels)
      throw std::runtime_error("integrate: tolerance not reached within panel budget");
    // Per-panel error budget proportional to the panel's share of [a,b].
    if (p.error <= abs_tol * (p.b - p.a) / (b - a) || p.error <= 1e-300) {
      total += p.value;
      continue;
    }
    if (depth + 2 > 64)
      throw std::runtime_error("integrate: recursion too deep");
    const double mid = 0.5 * (p.a + p.b);
    stack[depth++] = eval(p.a, mid);
    stack[depth++] = eval(mid, p.b);
  }
  return total;
}

}  // namespace distsynth
