#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "elshear/faults.hpp"

namespace elshear {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1,1].
/// Computed by Newton iteration on the Legendre recurrence.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  explicit GaussRule(int n) : nodes(n), weights(n) {
    const double eps = std::numeric_limits<double>::epsilon();
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0, dz = 1.0;
      int guard = 0;
      while (std::fabs(dz) >= 2 * eps && guard++ < 100) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
          double p3 = p2;
          p2 = p1;
          p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j;
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        dz = -p1 / pp;
        z += dz;
      }
      nodes[i] = -z;
      nodes[n - 1 - i] = z;
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
  }
};

inline const GaussRule& gauss_rule(int n) {
  static const GaussRule r16(16), r32(32), r64(64);
  switch (n) {
    case 16: return r16;
    case 32: return r32;
    default: return r64;
  }
}

/// Fixed n-point Gauss-Legendre approximation of \int_a^b f.
/// Result type follows the integrand (double or fixed-size Eigen array).
template <class F>
auto gauss(F&& f, double a, double b, int n = 32) {
  const GaussRule& r = gauss_rule(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto acc = f(mid + half * r.nodes[0]);
  acc *= r.weights[0];
  for (int i = 1; i < r.nodes.size(); ++i) {
    auto v = f(mid + half * r.nodes[i]);
    v *= r.weights[i];
    acc += v;
  }
  acc *= half;
  return acc;
}

namespace detail {
inline double quad_norm(double v) { return std::fabs(v); }
template <class D>
double quad_norm(const Eigen::ArrayBase<D>& v) {
  return v.abs().maxCoeff();
}
}  // namespace detail

namespace detail {
inline double quad_scale(double v) { return std::max(1.0, std::fabs(v)); }
template <class D>
double quad_scale(const Eigen::ArrayBase<D>& v) {
  return std::max(1.0, v.abs().maxCoeff());
}
}  // namespace detail

/// Adaptive composite Gauss-Legendre: panels are bisected until the
/// whole-panel vs split-panel estimates agree to the panel's share of tol,
/// measured relative to the scale of the whole integral. Throws
/// ConvergenceFault (reporting the offending interval) past max depth or
/// the panel budget.
template <class F>
auto adaptive_gauss(F&& f, double a, double b, double tol, int n = 64,
                    int max_depth = 42) {
  struct Panel {
    double a, b;
    int depth;
  };
  auto whole = gauss(f, a, b, n);
  using R = decltype(whole);
  const double scale = detail::quad_scale(whole);
  R total = whole;
  total *= 0.0;
  const double span = std::max(std::fabs(b - a),
                               std::numeric_limits<double>::min());
  std::vector<Panel> stack{{a, b, 0}};
  long budget = 100000;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    R coarse = gauss(f, p.a, p.b, n);
    R fine = gauss(f, p.a, m, n);
    fine += gauss(f, m, p.b, n);
    R diff = fine;
    diff -= coarse;
    const double share =
        tol * scale * std::max(std::fabs(p.b - p.a) / span, 1e-3);
    if (detail::quad_norm(diff) <= std::max(share, 1e-15 * scale)) {
      total += fine;
    } else if (p.depth >= max_depth || --budget <= 0) {
      std::ostringstream os;
      os << "adaptive quadrature stalled on [" << p.a << ", " << p.b
         << "] (residual " << detail::quad_norm(diff) << ", tol " << share
         << ")";
      throw ConvergenceFault(os.str());
    } else {
      stack.push_back({p.a, m, p.depth + 1});
      stack.push_back({m, p.b, p.depth + 1});
    }
  }
  return total;
}

}  // namespace elshear
