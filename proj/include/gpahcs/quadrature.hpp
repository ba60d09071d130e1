#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "gpahcs/errors.hpp"
#include "gpahcs/specfun.hpp"

namespace gpahcs {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  long evals = 0;
};

namespace detail {

// 16-point Gauss-Legendre rule on [-1, 1] (positive abscissas).
inline constexpr double kGL16Node[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double kGL16Weight[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <class F>
double gl16(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    acc += kGL16Weight[i] * (f(c - h * kGL16Node[i]) + f(c + h * kGL16Node[i]));
  }
  return acc * h;
}

template <class F>
void adapt_rec(F& f, double a, double b, double tol, int depth, int max_depth,
               Kahan& acc, double& err_acc, long& evals) {
  const double mid = 0.5 * (a + b);
  const double whole = gl16(f, a, b);
  const double halves = gl16(f, a, mid) + gl16(f, mid, b);
  evals += 48;
  const double err = std::abs(halves - whole);
  if (err <= tol || depth >= max_depth || (mid <= a || mid >= b)) {
    acc.add(halves);
    err_acc += err;
    return;
  }
  adapt_rec(f, a, mid, 0.5 * tol, depth + 1, max_depth, acc, err_acc, evals);
  adapt_rec(f, mid, b, 0.5 * tol, depth + 1, max_depth, acc, err_acc, evals);
}

}  // namespace detail

// Adaptive Gauss-Legendre on [a, b] by panel bisection.  Integrable endpoint
// singularities (log-type) are resolved by the graded panels the recursion
// produces near the offending endpoint.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                              double abs_tol = 0.0, int max_depth = 48) {
  auto& fn = f;
  const double scale = std::abs(detail::gl16(fn, a, b));
  const double tol = std::max(abs_tol, rel_tol * std::max(scale, 1e-300));
  detail::Kahan acc;
  double err = 0.0;
  long evals = 16;
  detail::adapt_rec(fn, a, b, tol, 0, max_depth, acc, err, evals);
  return {acc.value(), err, evals};
}

// Integral over (0, infinity) of an eventually-decaying integrand.  Doubling
// segments [x0 2^k, x0 2^{k+1}] are appended until two consecutive segments
// fall below tolerance relative to the running total; the remaining tail is
// estimated from the empirical decay of the last segments and folded into
// the error.  The left endpoint is clamped at x_floor: integrands here have
// at worst a log-type singularity at 0, so the clipped sliver is bounded by
// a few times x_floor * |f(x_floor)| and charged to the error.
template <class F>
QuadResult integrate_decaying(F&& f, double x0, double rel_tol,
                              double abs_floor = 0.0, int max_doublings = 60,
                              double x_floor = 1e-12) {
  auto& fn = f;
  detail::Kahan total;
  double err = 0.0;
  long evals = 0;

  x_floor = std::min(x_floor, 1e-6 * x0);
  QuadResult head =
      integrate_adaptive(fn, x_floor, x0, 0.1 * rel_tol, abs_floor);
  total.add(head.value);
  err += head.abs_error + 4.0 * x_floor * std::abs(fn(x_floor));
  evals += head.evals + 1;

  double lo = x0;
  double prev_seg = std::abs(head.value);
  double seg = prev_seg;
  int quiet = 0;
  for (int k = 0; k < max_doublings; ++k) {
    const double hi = 2.0 * lo;
    QuadResult part = integrate_adaptive(
        fn, lo, hi, 0.1 * rel_tol,
        std::max(abs_floor,
                 0.02 * rel_tol * std::abs(total.value()) / (k + 1.0)));
    total.add(part.value);
    err += part.abs_error;
    evals += part.evals;
    prev_seg = seg;
    seg = std::abs(part.value);
    lo = hi;
    if (seg <= rel_tol * 0.01 * std::max(std::abs(total.value()), 1e-300)) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
  }
  // Geometric tail extrapolation from the last two segments.
  if (seg > 0.0 && prev_seg > seg) {
    const double r = seg / prev_seg;
    err += seg * r / (1.0 - r);
  } else {
    err += seg;
  }
  return {total.value(), err, evals};
}

}  // namespace gpahcs
