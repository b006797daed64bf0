#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with global error control.
// Infinite limits are mapped onto finite ones with x = a + tan(u).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "sphere_area/errors.hpp"

namespace sphere_area::quad {

struct QuadratureSpec {
  double lower = 0.0;
  double upper = 1.0;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

namespace detail {

inline constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kNodes[1], [3], [5], [7].
inline constexpr double kGauss[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrod[j] * pair;
    if (j % 2 == 1) gauss += kGauss[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::fabs((kronrod - gauss) * half)};
}

template <class F>
QuadratureResult adaptive(F&& f, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod(f, a, b);
  double total = first.value;
  double error = first.error;
  panels.push(first);
  int subdivisions = 0;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) {
    if (subdivisions >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] reached " << subdivisions
          << " subdivisions with error estimate " << error;
      throw ToleranceNotMet(msg.str());
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gauss_kronrod(f, worst.a, mid);
    const Panel right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
    if (panels.size() % 64 == 0) {
      // Refresh the running sums to keep cancellation from drifting.
      auto copy = panels;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, error, subdivisions};
}

}  // namespace detail

/// Integrate f over [spec.lower, spec.upper]; either limit may be infinite.
/// Throws ToleranceNotMet when the subdivision budget is exhausted.
template <class F>
QuadratureResult integrate(F&& f, const QuadratureSpec& spec) {
  if (!(spec.lower < spec.upper)) throw DomainError("integrate: lower must be < upper");
  if (!(spec.abs_tol > 0) || !(spec.rel_tol > 0))
    throw DomainError("integrate: tolerances must be positive");
  const bool lo_inf = std::isinf(spec.lower);
  const bool hi_inf = std::isinf(spec.upper);
  constexpr double half_pi = std::numbers::pi / 2;
  auto guarded = [](double v) { return std::isfinite(v) ? v : 0.0; };
  if (!lo_inf && !hi_inf) {
    return detail::adaptive(f, spec.lower, spec.upper, spec);
  }
  if (lo_inf && hi_inf) {
    auto g = [&](double u) {
      const double c = std::cos(u);
      return guarded(f(std::tan(u)) / (c * c));
    };
    return detail::adaptive(g, -half_pi, half_pi, spec);
  }
  if (hi_inf) {
    const double a = spec.lower;
    auto g = [&](double u) {
      const double c = std::cos(u);
      return guarded(f(a + std::tan(u)) / (c * c));
    };
    return detail::adaptive(g, 0.0, half_pi, spec);
  }
  const double b = spec.upper;
  auto g = [&](double u) {
    const double c = std::cos(u);
    return guarded(f(b - std::tan(u)) / (c * c));
  };
  return detail::adaptive(g, 0.0, half_pi, spec);
}

/// Convenience wrapper returning only the value.
template <class F>
double integrate_value(F&& f, double lower, double upper, double abs_tol = 1e-12,
                       double rel_tol = 1e-12) {
  return integrate(std::forward<F>(f), QuadratureSpec{lower, upper, abs_tol, rel_tol}).value;
}

}  // namespace sphere_area::quad
