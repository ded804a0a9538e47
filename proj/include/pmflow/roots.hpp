#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "pmflow/errors.hpp"

namespace pmflow {

// Bracketed bisection to absolute tolerance on the abscissa. Requires
// f(a) and f(b) of opposite (or zero) sign.
template <class F>
double bisect(F&& f, double a, double b, double tol = 1e-12,
              int max_iter = 200) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb)) {
    throw NumericalError("bisect: endpoints do not bracket a root: f(" +
                         std::to_string(a) + ")=" + std::to_string(fa) +
                         ", f(" + std::to_string(b) + ")=" +
                         std::to_string(fb));
  }
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (std::signbit(fa) == std::signbit(fm)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

// Walk right from `a` in geometrically growing steps until f changes sign.
// Returns the bracketing interval, or nullopt after max_doublings steps.
template <class F>
std::optional<std::pair<double, double>> widen_bracket(
    F&& f, double a, double step0, int max_doublings = 60) {
  double lo = a;
  double flo = f(lo);
  if (flo == 0.0) return std::make_pair(lo, lo);
  double step = step0;
  for (int k = 0; k < max_doublings; ++k) {
    const double hi = lo + step;
    const double fhi = f(hi);
    if (std::signbit(flo) != std::signbit(fhi) || fhi == 0.0) {
      return std::make_pair(lo, hi);
    }
    lo = hi;
    flo = fhi;
    step *= 2.0;
  }
  return std::nullopt;
}

// Golden-section search for the maximizer of a unimodal function on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, double tol = 1e-10,
                  int max_iter = 300) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Bisection on a boolean predicate that is true on [lo, x*) and false on
// (x*, hi]; returns x* to absolute tolerance.
template <class P>
double bisect_predicate(P&& pred, double lo, double hi, double tol = 1e-12,
                        int max_iter = 200) {
  for (int it = 0; it < max_iter && (hi - lo) > tol; ++it) {
    const double m = 0.5 * (lo + hi);
    if (pred(m)) {
      lo = m;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace pmflow
