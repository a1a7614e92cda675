#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <utility>

#include "rainfall/errors.hpp"

namespace rainfall::numerics {

inline constexpr int kBrentMaxIterations = 200;

/// Brent's method (inverse quadratic interpolation with bisection fallback).
///
/// Requires f(lo)·f(hi) <= 0. Stops when |f(x)| <= f_tol or the bracket
/// half-width falls below 2·eps·|x| + tol/2. Throws NoBracketError if the
/// interval does not bracket a root and ConvergenceError after 200 iterations.
template <std::invocable<double> F>
double brent_root(F&& f, double lo, double hi, double tol, double f_tol = 0.0) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (!(lo < hi)) throw DomainError("brent_root: requires lo < hi");
  double a = lo, b = hi, c = hi;
  double fa = f(a), fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw DomainError("brent_root: f is NaN at an endpoint");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw NoBracketError("brent_root: interval does not bracket a root");
  double fc = fb;
  double d = b - a, e = d;
  for (int iter = 0; iter < kBrentMaxIterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || std::fabs(fb) <= f_tol) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
    if (std::isnan(fb)) throw DomainError("brent_root: f returned NaN");
  }
  throw ConvergenceError("brent_root: no convergence within 200 iterations");
}

}  // namespace rainfall::numerics
