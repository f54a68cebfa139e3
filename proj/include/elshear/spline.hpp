#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "elshear/faults.hpp"

namespace elshear {

/// Natural cubic spline over strictly increasing knots.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
      : x_(x), y_(y) {
    const Eigen::Index n = x.size();
    if (n < 3 || y.size() != n)
      throw RangeFault("CubicSpline: need >= 3 matching knots");
    // second derivatives by the classic tridiagonal sweep
    Eigen::VectorXd u(n), m(n);
    m[0] = u[0] = 0.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      const double sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
      const double p = sig * m[i - 1] + 2.0;
      m[i] = (sig - 1.0) / p;
      u[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) -
             (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
      u[i] = (6.0 * u[i] / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    d2_ = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = n - 2; i > 0; --i)
      d2_[i] = m[i] * d2_[i + 1] + u[i];
  }

  double operator()(double x) const {
    const auto [i, t, hh] = locate(x);
    const double a = 1.0 - t, b = t;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * d2_[i] + (b * b * b - b) * d2_[i + 1]) *
               (hh * hh) / 6.0;
  }

  double deriv(double x) const {
    const auto [i, t, hh] = locate(x);
    const double a = 1.0 - t, b = t;
    return (y_[i + 1] - y_[i]) / hh +
           hh * (-(3.0 * a * a - 1.0) * d2_[i] +
                 (3.0 * b * b - 1.0) * d2_[i + 1]) / 6.0;
  }

  double front_x() const { return x_[0]; }
  double back_x() const { return x_[x_.size() - 1]; }
  const Eigen::VectorXd& knots() const { return x_; }
  const Eigen::VectorXd& values() const { return y_; }

 private:
  struct Loc { Eigen::Index i; double t; double h; };

  Loc locate(double x) const {
    const Eigen::Index n = x_.size();
    Eigen::Index lo =
        std::upper_bound(x_.data(), x_.data() + n, x) - x_.data();
    lo = std::clamp<Eigen::Index>(lo - 1, 0, n - 2);
    const double hh = x_[lo + 1] - x_[lo];
    return {lo, (x - x_[lo]) / hh, hh};
  }

  Eigen::VectorXd x_, y_, d2_;
};

}  // namespace elshear
