#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "elshear/faults.hpp"
#include "elshear/spline.hpp"

namespace elshear {

inline constexpr double kPi = 3.14159265358979323846;

/// Leslie viscosities, elastic constants and the anchoring angle.
/// gamma1/gamma2 are always derived from the alphas, never stored.
struct MaterialParams {
  double alpha1 = 1.0;
  double alpha2 = -1.0;
  double alpha3 = 0.0;
  double alpha4 = 2.0;
  double alpha5 = 0.5;
  double alpha6 = -0.5;
  double K1 = 1.0;
  double K3 = 1.0;
  double theta0 = kPi / 3.0;

  double gamma1() const { return alpha3 - alpha2; }
  double gamma2() const { return alpha6 - alpha5; }

  /// Canonical config: gamma1 = 1 = -gamma2, isotropic elasticity.
  static MaterialParams p0() { return MaterialParams{}; }

  /// Variant with K3 = 4 so that c'(theta) != 0.
  static MaterialParams p0_aniso() {
    MaterialParams p;
    p.K3 = 4.0;
    return p;
  }
};

enum class Regime {
  kOppositeSigns,  // gamma1 = -gamma2, equilibria at n*pi
  kEqualSigns,     // gamma1 =  gamma2, equilibria at (2n+1)*pi/2
  kDominant,       // gamma1 > |gamma2|, no equilibria
  kUnsupported,    // gamma1 < |gamma2| (out of scope)
};

std::string to_string(Regime r);

struct ValidationCheck {
  std::string name;
  bool pass;
  double margin;  // signed slack: >= 0 means satisfied
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok = false;
  double damping_floor = 0.0;  // Cbar = min_theta (g - h^2/gamma1)
};

struct EquilibriumSet {
  Regime regime = Regime::kUnsupported;
  std::vector<double> angles;       // e_n inside the requested window
  std::vector<double> poles;        // beta_n = -G(e_n) > 0, ascending
  std::vector<double> pole_angles;  // e_n generating each pole
};

/// Pointwise coefficient functions of one parameter set, plus the cached
/// potential G and its inverse F. Immutable after construction; safe to
/// share across threads.
class Material {
 public:
  struct Options {
    double theta_margin = 3.25 * kPi;  // cache window below theta0
    double theta_above = 0.25 * kPi;   // cache window above theta0
    double cache_tol = 1e-11;
    double quad_tol = 1e-12;
  };

  explicit Material(const MaterialParams& p);
  Material(const MaterialParams& p, const Options& opt);

  const MaterialParams& params() const { return p_; }
  double gamma1() const { return p_.gamma1(); }
  double gamma2() const { return p_.gamma2(); }
  double theta0() const { return p_.theta0; }

  // coefficient functions and exact derivatives
  double g(double th) const;
  double gp(double th) const;
  double h(double th) const;
  double hp(double th) const;
  double c2(double th) const;
  double c2p(double th) const;
  double c(double th) const { return std::sqrt(c2(th)); }
  double cp(double th) const { return c2p(th) / (2.0 * c(th)); }
  double cpp(double th) const;
  double hg(double th) const { return h(th) / g(th); }
  double hgp(double th) const;  // (h/g)'
  double damping(double th) const;  // g - h^2/gamma1
  double chp(double th) const;   // (c/h)'
  double cghp(double th) const;  // (cg/h)'

  /// Potential G(theta) = int_{theta0}^theta h/g, spline-cached on the
  /// working window, exact adaptive quadrature outside of it.
  double G(double th) const;
  /// Direct adaptive quadrature (no cache); also used to build the cache.
  double G_exact(double th) const;
  /// Accurate G(z1) - G(z0) for short intervals (avoids cancellation).
  double G_delta(double z0, double z1) const;
  /// Inverse of G. Bracketed bisection plus guarded Newton.
  double F(double s) const;

  Regime regime() const { return regime_; }
  /// Equilibrium angles e_n of the stationary system inside [lo, hi].
  std::vector<double> equilibrium_angles(double lo, double hi) const;
  EquilibriumSet equilibria(double lo, double hi) const;
  /// Equilibria crossed by the orbit of level beta, i.e. angles e with
  /// 0 < beta_n < beta, descending from theta0.
  std::vector<double> crossings_below(double beta) const;

  ValidationReport validate() const;

  double cache_lo() const { return spline_.front_x(); }
  double cache_hi() const { return spline_.back_x(); }

 private:
  void build_cache();

  MaterialParams p_;
  Options opt_;
  Regime regime_;
  CubicSpline spline_;  // G on the working window
};

}  // namespace elshear
