#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "elshear/faults.hpp"

namespace elshear {

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  double max_local_error = 0.0;  // largest accepted scaled error estimate
};

/// Adaptive Dormand-Prince 5(4) integrator over Eigen vector states.
///
/// rhs(x, y, dydx) fills the derivative. Integration direction follows
/// sign(x1 - x0). Error control uses the standard Hairer-style mixed
/// absolute/relative weighted RMS norm.
template <class State, class RHS>
OdeStats integrate_ode(RHS&& rhs, double x0, double x1, State& y,
                       double rtol = 1e-10, double atol = 1e-12,
                       long max_steps = 2000000) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // difference between 5th and embedded 4th order weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats stats;
  if (x0 == x1) return stats;
  const double dir = (x1 > x0) ? 1.0 : -1.0;
  double x = x0;
  double h = dir * std::min(1e-3, std::fabs(x1 - x0));

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y,
        ynew = y, yerr = y;
  rhs(x, y, k1);

  while (dir * (x1 - x) > 0) {
    if (dir * (x + h - x1) > 0) h = x1 - x;
    ytmp = y + h * a21 * k1;
    rhs(x + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(x + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(x + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(x + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(x + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(x + h, ynew, k7);
    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc =
          atol + rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      const double e = yerr[i] / sc;
      err2 += e * e;
    }
    const double err = std::sqrt(err2 / static_cast<double>(y.size()));

    if (err <= 1.0) {
      x += h;
      y = ynew;
      k1 = k7;  // FSAL
      ++stats.steps;
      stats.max_local_error = std::max(stats.max_local_error, err);
    } else {
      ++stats.rejected;
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= fac;
    if (std::fabs(h) < 1e-15 * std::max(1.0, std::fabs(x)) ||
        stats.steps + stats.rejected > max_steps) {
      std::ostringstream os;
      os << "ODE integration stalled at x=" << x << " (h=" << h << ")";
      throw ConvergenceFault(os.str());
    }
  }
  return stats;
}

}  // namespace elshear
