#pragma once

#include <Eigen/Dense>
#include <vector>

#include "elshear/material.hpp"

namespace elshear {

/// Tolerances and guards shared by the stationary/bifurcation/spectral
/// pipelines.
struct SolverOptions {
  double quad_tol = 1e-10;        // adaptive quadrature target for D
  double quad_tol_tight = 1e-12;  // near minima and for root polishing
  double pole_guard = 1e-8;       // relative keep-out around beta_n
  double ode_rtol = 1e-10;        // shooting integrations
  double root_tol = 1e-10;        // |2D - ubar| at accepted roots
  int profile_n = 1025;           // grid size (odd, includes x = 1/2)
};

/// The four singular quadratures entering D, D' and the monodromy closed
/// forms. In the paper's notation: Ig = sqrt(p0/2), I1 = S(theta~, theta0),
/// IM = M, IMg = M^g.
struct Quartet {
  double Ig = 0.0;
  double I1 = 0.0;
  double IM = 0.0;
  double IMg = 0.0;
};

/// Discretized stationary solution on [0,1] with its invariants.
struct StationaryProfile {
  Eigen::VectorXd x, u, theta, eta;
  double beta = 0.0;
  double theta_tilde = 0.0;
  double p0 = 0.0;
  double ubar = 0.0;
};

struct ConservedDrift {
  double dH1 = 0.0;
  double dH2 = 0.0;
  double dH3 = 0.0;
};

/// The bifurcation map D(beta) and everything derived from it: roots of
/// 2D = ubar, full profile reconstruction, conserved-quantity audits.
class StationaryMap {
 public:
  StationaryMap(const Material& mat, SolverOptions opt = SolverOptions{});

  const Material& material() const { return *mat_; }
  const SolverOptions& options() const { return opt_; }

  /// Distance-to-pole guard; throws PoleFault inside the band.
  void guard(double beta) const;

  Quartet quartet(double beta) const { return quartet(beta, opt_.quad_tol); }
  Quartet quartet(double beta, double tol) const;

  double D(double beta) const { return D(beta, opt_.quad_tol); }
  double D(double beta, double tol) const;
  double D_prime(double beta) const { return D_prime(beta, opt_.quad_tol); }
  double D_prime(double beta, double tol) const;
  double D_second(double beta) const;

  double theta_tilde(double beta) const;
  double p0_of(double beta) const;

  /// All roots of 2D(beta) = ubar inside (lo, hi), ascending.
  std::vector<double> solve_ubar(double ubar, double lo, double hi) const;

  /// Exact-solution reconstruction through the quadrature relations.
  StationaryProfile reconstruct_profile(double beta, int n = 0) const;

  /// Max drift of H1, H2, H3 along the grid relative to their x=0 values.
  ConservedDrift conserved_drift(const StationaryProfile& p) const;

  /// S(theta~, theta) = int_{theta~}^theta c/(g sqrt(G - G(theta~))).
  double S1_from_tilde(double beta, double theta) const;

  /// Literal t = tau^2 scheme for D (valid on (0, beta_1)); kept as the
  /// second algebraic route for the equivalence property.
  double D_tau_form(double beta, double tol) const;

  /// Independent oracle: shoot the nonlinear system from the turning point
  /// and read off ubar; p0 is determined by matching theta(1) = theta0.
  double ubar_by_shooting(double beta) const;

 private:
  const Material* mat_;
  SolverOptions opt_;
};

}  // namespace elshear
