#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elshear/stationary.hpp"

namespace elshear {

/// One local minimum of D on the interval I_n = (beta_n, beta_{n+1}).
struct DMinimum {
  int n = 0;
  double beta_star = 0.0;
  double ubar_n = 0.0;   // 2 D(beta*) -- the critical shear speed
  double d2 = 0.0;       // D''(beta*)
};

struct BranchPoint {
  double ubar;
  double beta;
  int interval;       // 0 for (0, beta_1), n >= 1 for I_n
  std::string side;   // "lower" (beta < beta*) or "upper"
  int sign_dprime;    // stability tag, pending spectral confirmation
};

struct BifurcationDiagram {
  std::vector<double> poles;
  std::vector<DMinimum> minima;
  std::vector<BranchPoint> points;
};

/// Locates poles, minima and critical shear speeds of D, and assembles the
/// (ubar, beta) saddle-node branch diagram.
class Bifurcation {
 public:
  explicit Bifurcation(const StationaryMap& map);

  const StationaryMap& map() const { return *map_; }

  /// Pole locations beta_n computed exactly as -G(e_n), ascending.
  std::vector<double> poles() const;

  /// Interval I_n bounds (guard-shrunk). n = 0 denotes (0, beta_1).
  std::pair<double, double> interval(int n) const;

  /// Minimum of D on I_n; absent when D is monotone there.
  std::optional<DMinimum> find_minimum(int n) const;
  /// Same search on an explicit window (for regimes without poles).
  std::optional<DMinimum> find_minimum_on(double lo, double hi, int n) const;

  /// The two roots of 2D = ubar adjacent to beta* for ubar slightly above
  /// the fold. Throws NoRootFault for ubar <= ubar_n.
  std::pair<double, double> two_roots_near(const DMinimum& m,
                                           double ubar) const;

  BifurcationDiagram branch_diagram(double ubar_max, int samples) const;

 private:
  const StationaryMap* map_;
};

}  // namespace elshear
