#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "elshear/faults.hpp"

namespace elshear {

/// Brent's method on a bracketing interval [a,b] with f(a)*f(b) <= 0.
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb,
                  double xtol = 1e-13, int max_iter = 200) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw RangeFault("brent_root: interval does not bracket");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::fabs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q),
                             std::fabs(e * q))) {
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
    b += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}

template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-13) {
  return brent_root(f, a, b, f(a), f(b), xtol);
}

/// Sign-change brackets of f over an ordered grid of abscissae.
template <class F>
std::vector<std::pair<double, double>> sign_change_brackets(
    F&& f, const std::vector<double>& grid) {
  std::vector<std::pair<double, double>> out;
  if (grid.size() < 2) return out;
  double prev = f(grid[0]);
  for (size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    if (prev == 0.0) out.emplace_back(grid[i - 1], grid[i - 1]);
    else if (prev * cur < 0.0) out.emplace_back(grid[i - 1], grid[i]);
    prev = cur;
  }
  return out;
}

/// Golden-section minimization on [a,b]; assumes a single interior minimum.
template <class F>
double golden_min(F&& f, double a, double b, double xtol = 1e-10) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace elshear
