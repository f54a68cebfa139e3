#include "elshear/bifurcation.hpp"

#include <algorithm>
#include <cmath>

#include "elshear/roots.hpp"

namespace elshear {

Bifurcation::Bifurcation(const StationaryMap& map) : map_(&map) {}

std::vector<double> Bifurcation::poles() const {
  const Material& m = map_->material();
  return m.equilibria(m.cache_lo(), m.theta0()).poles;
}

std::pair<double, double> Bifurcation::interval(int n) const {
  const std::vector<double> bn = poles();
  const double guard = map_->options().pole_guard;
  if (n == 0) {
    if (bn.empty()) throw RangeFault("interval: no poles in this regime");
    return {8.0 * guard, bn[0] * (1.0 - 8.0 * guard)};
  }
  if (n < 1 || n + 1 > static_cast<int>(bn.size()))
    throw RangeFault("interval index outside the working window");
  const double lo = bn[n - 1], hi = bn[n];
  const double pad = 8.0 * guard * std::max(1.0, hi);
  return {lo + pad, hi - pad};
}

std::optional<DMinimum> Bifurcation::find_minimum(int n) const {
  if (n < 1) throw RangeFault("find_minimum: n must be >= 1");
  auto [lo, hi] = interval(n);
  return find_minimum_on(lo, hi, n);
}

std::optional<DMinimum> Bifurcation::find_minimum_on(double lo, double hi,
                                                     int n) const {
  const StationaryMap& sm = *map_;
  // coarse unimodality scan with geometric refinement toward the ends
  std::vector<double> grid;
  const int m = 48;
  for (int i = 0; i <= m; ++i) grid.push_back(lo + (hi - lo) * i / m);
  for (int k = 2; k <= 16; ++k) {
    const double f = std::ldexp(1.0, -k);
    grid.push_back(lo + (hi - lo) * f);
    grid.push_back(hi - (hi - lo) * f);
  }
  std::sort(grid.begin(), grid.end());
  double best = std::numeric_limits<double>::infinity();
  size_t ib = 0;
  std::vector<double> vals(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    vals[i] = sm.D(grid[i]);
    if (vals[i] < best) {
      best = vals[i];
      ib = i;
    }
  }
  if (ib == 0 || ib + 1 == grid.size()) return std::nullopt;  // monotone

  double a = grid[ib - 1], b = grid[ib + 1];
  double bs = golden_min([&](double x) { return sm.D(x); }, a, b, 1e-8);
  // polish the first-order condition on the analytic D'
  const double tight = sm.options().quad_tol_tight;
  double d1 = sm.D_prime(bs, tight);
  for (int it = 0; it < 60 && std::fabs(d1) > 1e-12; ++it) {
    const double step = 1e-6 * std::max(1.0, bs);
    const double d2 =
        (sm.D_prime(bs + step, tight) - sm.D_prime(bs - step, tight)) /
        (2.0 * step);
    if (!(d2 > 0.0)) break;
    const double delta = d1 / d2;
    bs -= delta;
    d1 = sm.D_prime(bs, tight);
    if (std::fabs(delta) < 1e-13 * std::max(1.0, bs)) break;
  }
  if (!(bs > lo && bs < hi)) return std::nullopt;

  DMinimum out;
  out.n = n;
  out.beta_star = bs;
  out.ubar_n = 2.0 * sm.D(bs, tight);
  out.d2 = sm.D_second(bs);
  return out;
}

std::pair<double, double> Bifurcation::two_roots_near(const DMinimum& m,
                                                      double ubar) const {
  const StationaryMap& sm = *map_;
  if (!(ubar > m.ubar_n))
    throw NoRootFault("two_roots_near: ubar is below the critical value");
  auto [lo, hi] = interval(m.n);
  auto f = [&](double b) {
    return 2.0 * sm.D(b, sm.options().quad_tol_tight) - ubar;
  };
  const double fstar = m.ubar_n - ubar;  // negative by construction
  auto find_side = [&](double edge) {
    const double fe = f(edge);
    if (fe < 0.0)
      throw NoRootFault("two_roots_near: no sign change before the guard");
    return brent_root(f, m.beta_star, edge, fstar, fe,
                      1e-13 * std::max(1.0, hi));
  };
  const double left = find_side(lo);
  const double right = find_side(hi);
  return {std::min(left, right), std::max(left, right)};
}

BifurcationDiagram Bifurcation::branch_diagram(double ubar_max,
                                               int samples) const {
  if (!(ubar_max > 0.0)) throw RangeFault("branch_diagram: ubar_max <= 0");
  const StationaryMap& sm = *map_;
  BifurcationDiagram diag;
  diag.poles = poles();

  const int max_interval =
      std::min<int>(2, static_cast<int>(diag.poles.size()) - 1);
  for (int n = 1; n <= max_interval; ++n) {
    auto mn = find_minimum(n);
    if (mn) diag.minima.push_back(*mn);
  }

  // uniform ubar samples plus geometric refinement above each fold
  std::vector<double> ubars;
  for (int i = 1; i <= samples; ++i)
    ubars.push_back(ubar_max * i / samples);
  const double du = ubar_max / samples;
  for (const DMinimum& mn : diag.minima) {
    if (mn.ubar_n >= ubar_max) continue;
    for (int j = 0; j <= 8; ++j)
      ubars.push_back(mn.ubar_n + du * std::ldexp(1.0, -j));
  }
  std::sort(ubars.begin(), ubars.end());
  ubars.erase(std::unique(ubars.begin(), ubars.end()), ubars.end());

  // per-interval cached D scan; roots per ubar come from the cached
  // bracketing plus a local polish
  const int n_intervals =
      std::min<int>(2, static_cast<int>(diag.poles.size()) - 1);
  for (int n = 0; n <= n_intervals; ++n) {
    auto [lo, hi] = interval(n);
    std::vector<double> bs;
    const int m = 384;
    for (int i = 0; i <= m; ++i) bs.push_back(lo + (hi - lo) * i / m);
    for (int k = 2; k <= 20; ++k) {
      const double fr = std::ldexp(1.0, -k);
      bs.push_back(lo + (hi - lo) * fr);
      bs.push_back(hi - (hi - lo) * fr);
    }
    std::sort(bs.begin(), bs.end());
    std::vector<double> dv(bs.size());
    for (size_t i = 0; i < bs.size(); ++i) dv[i] = 2.0 * sm.D(bs[i]);

    double bstar = std::numeric_limits<double>::infinity();
    for (const DMinimum& mn : diag.minima)
      if (mn.n == n) bstar = mn.beta_star;

    for (double ub : ubars) {
      if (ub > ubar_max) continue;
      for (size_t i = 0; i + 1 < bs.size(); ++i) {
        if ((dv[i] - ub) * (dv[i + 1] - ub) > 0.0) continue;
        auto f = [&](double b) {
          return 2.0 * sm.D(b, sm.options().quad_tol_tight) - ub;
        };
        const double b = brent_root(f, bs[i], bs[i + 1],
                                    1e-12 * std::max(1.0, hi));
        BranchPoint pt;
        pt.ubar = ub;
        pt.beta = b;
        pt.interval = n;
        const double dp = sm.D_prime(b);
        pt.sign_dprime = (dp > 0.0) ? 1 : (dp < 0.0 ? -1 : 0);
        pt.side = (n == 0) ? "lower" : (b < bstar ? "lower" : "upper");
        diag.points.push_back(pt);
      }
    }
  }
  std::sort(diag.points.begin(), diag.points.end(),
            [](const BranchPoint& a, const BranchPoint& b) {
              if (a.interval != b.interval) return a.interval < b.interval;
              if (a.ubar != b.ubar) return a.ubar < b.ubar;
              return a.beta < b.beta;
            });
  return diag;
}

}  // namespace elshear
