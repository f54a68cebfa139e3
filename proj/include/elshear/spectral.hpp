#pragma once

#include <Eigen/Dense>
#include <vector>

#include "elshear/spline.hpp"
#include "elshear/stationary.hpp"

namespace elshear {

/// The linearized eigenvalue ODE Z' = (A(x) + lambda B(x)) Z along a
/// stationary profile, Z = (U, P, Theta, Q). Coefficients evaluate at any
/// x through cubic splines of the profile fields; theta_x and u_x come
/// from the closed forms eta/c^2 and p0/g.
class LinearizedSystem {
 public:
  LinearizedSystem(const Material& mat, const StationaryProfile& profile);

  const Material& material() const { return *mat_; }
  double beta() const { return beta_; }
  double p0() const { return p0_; }
  double ubar() const { return ubar_; }

  double theta(double x) const { return theta_s_(x); }
  double eta(double x) const { return eta_s_(x); }
  double theta_x(double x) const;
  double u_x(double x) const;
  double b1(double x) const;
  double b2(double x) const;  // gamma1 - h^2/g, positive by the damping bound

  Eigen::Matrix4d A(double x) const;
  Eigen::Matrix4d B(double x) const;

 private:
  const Material* mat_;
  CubicSpline theta_s_, eta_s_;
  double beta_, p0_, ubar_;
};

LinearizedSystem build_linearization(const Material& mat,
                                     const StationaryProfile& profile);

/// One Evans-function evaluation by two-sided shooting with the matching
/// point at x = 1/2 and Liouville check-points at {1/4, 1/2, 3/4}.
struct EvansEvaluation {
  double lambda = 0.0;
  double beta = 0.0;
  double E = 0.0;
  double x_residual = 0.0;
  long steps = 0;
  double max_local_error = 0.0;
};

EvansEvaluation evans(const LinearizedSystem& sys, double lambda,
                      double rtol = 1e-10);

struct ZeroIdentity {
  double E0 = 0.0;   // Evans value at lambda = 0 (shooting pipeline)
  double rhs = 0.0;  // -(2 beta / (p0 c^2(theta0))) D'(beta) (quadrature)
  double gap = 0.0;  // relative difference
};

ZeroIdentity evans_zero_identity(const LinearizedSystem& sys,
                                 const StationaryMap& map);

/// Fundamental solution of the lambda = 0 system with Phi(0) = I, plus the
/// comparison of its x = 1 entries against the closed-form quadratures.
struct MonodromyResult {
  Eigen::Matrix4d Phi1;
  double det_residual = 0.0;   // |det Phi(1) - 1|
  double evans0 = 0.0;         // -T12 T34 + T14 T32 at x = 1
  double T12_cf = 0.0, T14_cf = 0.0, T32_cf = 0.0, T34_cf = 0.0;
};

MonodromyResult monodromy(const LinearizedSystem& sys,
                          const StationaryMap& map);

/// d/dlambda of the Evans function at lambda = 0: centered finite
/// differences on the shooting pipeline vs the variation-of-parameters
/// quadrature along the monodromy.
struct LambdaDerivative {
  double fd = 0.0;
  double vp = 0.0;
  double gap = 0.0;
};

LambdaDerivative evans_lambda_derivative(const LinearizedSystem& sys,
                                         double fd_step = 1e-5,
                                         double rtol = 1e-10);

/// Real eigenvalues of the linearization inside [lo, hi]: sign-change
/// bracketing of E on a uniform grid, bisection polish.
struct ScannedEigenvalue {
  double lambda;
  double residual;  // |E| at the accepted root
};

std::vector<ScannedEigenvalue> eigen_scan(const LinearizedSystem& sys,
                                          double lo, double hi, int grid,
                                          double rtol = 1e-10);

/// Track the Evans root near lambda = 0 for the profile at beta.
double track_eigenvalue_near_zero(const LinearizedSystem& sys,
                                  double window, double rtol = 1e-10);

/// Zero-eigenvalue slope at a fold: formula vs tracked-root fit.
struct SlopeReport {
  double formula = 0.0;      // 2 beta*/(p0 c^2(theta0) E_lambda) D''(beta*)
  double tracked = 0.0;      // centered fit of lambda(beta) at beta*
  double gap = 0.0;
  double lambda_minus = 0.0;  // tracked root at beta* - delta
  double lambda_plus = 0.0;   // tracked root at beta* + delta
  double e_lambda = 0.0;
  double lambda_at_star = 0.0;
};

SlopeReport eigenvalue_slope(const StationaryMap& map, double beta_star,
                             double d2, double delta_beta = 0.0);

/// (U, Theta) eigenfunction samples at the grid xs for an Evans root.
struct Eigenfunction {
  Eigen::VectorXd x, U, Theta;
};

Eigenfunction eigenfunction(const LinearizedSystem& sys, double lambda,
                            const Eigen::VectorXd& xs, double rtol = 1e-10);

}  // namespace elshear
