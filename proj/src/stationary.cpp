#include "elshear/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elshear/ode.hpp"
#include "elshear/quadrature.hpp"
#include "elshear/roots.hpp"

namespace elshear {

using Eigen::Array2d;
using Eigen::Array4d;
using Eigen::Vector3d;
using Eigen::VectorXd;

StationaryMap::StationaryMap(const Material& mat, SolverOptions opt)
    : mat_(&mat), opt_(opt) {}

void StationaryMap::guard(double beta) const {
  if (!(beta > 0.0)) throw RangeFault("D(beta): beta must be positive");
  if (-beta < mat_->G(mat_->cache_lo()))
    throw RangeFault("D(beta): beta beyond the cached working window");
  const EquilibriumSet eq =
      mat_->equilibria(mat_->cache_lo(), mat_->theta0());
  for (double bn : eq.poles) {
    if (std::fabs(beta - bn) < opt_.pole_guard * std::max(1.0, bn)) {
      std::ostringstream os;
      os << "beta = " << beta << " inside the guard band of pole " << bn;
      throw PoleFault(os.str());
    }
  }
}

namespace {

// Segment layout shared by the quartet quadratures and the profile
// reconstruction: a w-substituted endpoint piece [theta~, m0] (w^2 =
// theta - theta~ removes the 1/sqrt singularity) and a smooth piece
// [m0, theta0] on which G - G(theta~) is bounded below.
struct Pieces {
  double tt;     // turning angle theta~
  double m0;     // switch point
  double W;      // sqrt(m0 - tt)
  double beta;
  const Material* mat;

  // G(z) - G(theta~), safe against cancellation near theta~
  double u2(double z) const {
    const double d = z - tt;
    if (d <= 0.0) return 0.0;
    if (d <= 0.5) return mat->G_delta(tt, z);
    return beta + mat->G(z);
  }

  // 2w / sqrt(G(tt + w^2) - G(tt)); series branch once w^2 underflows
  // against tt (the limit at w = 0 is 2/sqrt((h/g)(tt)))
  double wratio(double w) const {
    const double w2 = w * w;
    if (w2 <= 1e-9)
      return 2.0 / std::sqrt(mat->hg(tt) + 0.5 * mat->hgp(tt) * w2);
    return 2.0 * w / std::sqrt(u2(tt + w2));
  }
};

Pieces make_pieces(const Material& mat, double beta) {
  Pieces pc;
  pc.mat = &mat;
  pc.beta = beta;
  pc.tt = mat.F(-beta);
  const double th0 = mat.theta0();
  double first = th0;
  for (double e : mat.crossings_below(beta))
    first = std::min(first, (e > pc.tt) ? e : th0);
  pc.m0 = pc.tt + std::min(0.5, 0.5 * (first - pc.tt));
  pc.W = std::sqrt(pc.m0 - pc.tt);
  return pc;
}
}  // namespace

Quartet StationaryMap::quartet(double beta, double tol) const {
  guard(beta);
  const Material& m = *mat_;
  const Pieces pc = make_pieces(m, beta);
  const double th0 = m.theta0();

  // endpoint piece: all four integrands carry the same 2w/sqrt(G - G~)
  Array4d wpart = adaptive_gauss(
      [&](double w) -> Array4d {
        const double z = pc.tt + w * w;
        const double r = pc.wratio(w);
        return Array4d(m.c(z), m.c(z) / m.g(z), m.chp(z), m.cghp(z)) * r;
      },
      0.0, pc.W, tol / 2.0);

  // smooth piece: Ig/I1 directly; IM/IMg after one integration by parts,
  // which removes the principal-value blowup at interior h-zeros
  Array4d spart = adaptive_gauss(
      [&](double z) -> Array4d {
        const double u2 = pc.u2(z);
        const double u = std::sqrt(u2);
        const double cg = m.c(z) / m.g(z);
        return Array4d(m.c(z) / u, cg / u, cg / (2.0 * u2 * u),
                       m.c(z) / (2.0 * u2 * u));
      },
      pc.m0, th0, tol / 2.0);

  const double um0 = std::sqrt(pc.u2(pc.m0));
  const double sqb = std::sqrt(beta);
  Quartet q;
  q.Ig = wpart[0] + spart[0];
  q.I1 = wpart[1] + spart[1];
  q.IM = wpart[2] + spart[2] + (m.c(th0) / m.h(th0)) / sqb -
         (m.c(pc.m0) / m.h(pc.m0)) / um0;
  q.IMg = wpart[3] + spart[3] + (m.c(th0) * m.g(th0) / m.h(th0)) / sqb -
          (m.c(pc.m0) * m.g(pc.m0) / m.h(pc.m0)) / um0;
  return q;
}

double StationaryMap::D(double beta, double tol) const {
  const Quartet q = quartet(beta, tol);
  return q.Ig * q.I1;
}

double StationaryMap::D_prime(double beta, double tol) const {
  const Quartet q = quartet(beta, tol);
  const Material& m = *mat_;
  const double th0 = m.theta0();
  const double sqb = std::sqrt(beta);
  return (m.c(th0) * m.g(th0) / m.h(th0)) / sqb * q.I1 +
         (m.c(th0) / m.h(th0)) / sqb * q.Ig - q.IMg * q.I1 - q.IM * q.Ig;
}

double StationaryMap::D_second(double beta) const {
  const double step = 1e-4 * std::max(1.0, beta);
  return (D_prime(beta + step, opt_.quad_tol_tight) -
          D_prime(beta - step, opt_.quad_tol_tight)) /
         (2.0 * step);
}

double StationaryMap::theta_tilde(double beta) const {
  guard(beta);
  return mat_->F(-beta);
}

double StationaryMap::p0_of(double beta) const {
  const Quartet q = quartet(beta, opt_.quad_tol_tight);
  return 2.0 * q.Ig * q.Ig;
}

std::vector<double> StationaryMap::solve_ubar(double ubar, double lo,
                                              double hi) const {
  if (!(ubar > 0.0)) throw RangeFault("solve_ubar: ubar must be positive");
  if (!(lo > 0.0) || !(hi > lo))
    throw RangeFault("solve_ubar: bad interval");
  guard(lo);  // interval touching a pole is a fault
  guard(hi);

  // log-refined scan grid: uniform core plus geometric tails toward both
  // endpoints (D may diverge there)
  std::vector<double> grid;
  const int uniform = 160;
  for (int i = 0; i <= uniform; ++i)
    grid.push_back(lo + (hi - lo) * i / uniform);
  for (int k = 1; k <= 24; ++k) {
    const double f = std::ldexp(1.0, -k);  // 2^-k
    grid.push_back(lo + (hi - lo) * f);
    grid.push_back(hi - (hi - lo) * f);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto f = [&](double b) { return 2.0 * D(b, opt_.quad_tol_tight) - ubar; };
  std::vector<double> roots;
  for (auto [a, b] : sign_change_brackets(f, grid)) {
    if (a == b) {
      roots.push_back(a);
      continue;
    }
    const double r = brent_root(f, a, b, 1e-14 * std::max(1.0, hi));
    if (std::fabs(f(r)) <= std::max(opt_.root_tol, 1e-12 * ubar))
      roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

namespace {

// Running cumulative quadrature along a monotone path; used by the
// implicit inversion of the third line of the exact solution.
struct Accumulator {
  double pos;       // current abscissa (w or theta)
  Array2d totals;   // [S^g, S] running values

  template <class F2>
  void advance(F2&& integrand, double to) {
    if (to != pos) totals += gauss(integrand, pos, to, 16);
    pos = to;
  }
};

}  // namespace

StationaryProfile StationaryMap::reconstruct_profile(double beta,
                                                     int n) const {
  if (n <= 0) n = opt_.profile_n;
  if (n < 65 || n % 2 == 0)
    throw RangeFault("profile grid must be odd and >= 65");
  const Material& m = *mat_;
  const Pieces pc = make_pieces(m, beta);
  const Quartet q = quartet(beta, opt_.quad_tol_tight);
  const double p0 = 2.0 * q.Ig * q.Ig;
  const double ubar = 2.0 * q.Ig * q.I1;
  const double sq2p0 = std::sqrt(2.0 * p0);

  StationaryProfile prof;
  prof.beta = beta;
  prof.theta_tilde = pc.tt;
  prof.p0 = p0;
  prof.ubar = ubar;
  prof.x = VectorXd::LinSpaced(n, 0.0, 1.0);
  prof.u.resize(n);
  prof.theta.resize(n);
  prof.eta.resize(n);

  const int mid = (n - 1) / 2;
  prof.theta[mid] = pc.tt;
  prof.eta[mid] = 0.0;
  prof.u[mid] = 0.5 * ubar;

  // integrands of (S^g, S) in the w variable and in theta
  auto f_w = [&](double w) -> Array2d {
    const double z = pc.tt + w * w;
    const double r = pc.wratio(w);
    return Array2d(m.c(z), m.c(z) / m.g(z)) * r;
  };
  auto f_th = [&](double z) -> Array2d {
    const double u = std::sqrt(pc.u2(z));
    return Array2d(m.c(z) / u, m.c(z) / (m.g(z) * u));
  };

  // total S^g over the w piece, for the phase switch
  const Array2d wtot = adaptive_gauss(f_w, 0.0, pc.W, opt_.quad_tol_tight);

  Accumulator acc{0.0, Array2d::Zero()};
  bool in_w_phase = true;
  const double dx = 1.0 / (n - 1);
  // the spec's near-turning-point expansion seeds the first Newton solve
  double w_seed =
      dx * std::sqrt(0.5 * p0 * m.h(pc.tt) / (m.g(pc.tt) * m.c2(pc.tt)));

  for (int i = mid + 1; i < n; ++i) {
    const double target = sq2p0 * (prof.x[i] - 0.5);
    if (in_w_phase && target > wtot[0]) {
      // hand over to the theta phase at the switch point
      acc.advance(f_w, pc.W);
      acc.pos = pc.m0;
      in_w_phase = false;
    }
    if (in_w_phase) {
      double w = (i == mid + 1) ? w_seed : acc.pos;
      for (int it = 0;; ++it) {
        acc.advance(f_w, w);
        const double res = acc.totals[0] - target;
        if (std::fabs(res) <= 1e-13 * std::max(1.0, target)) break;
        if (it > 60)
          throw ConvergenceFault(
              "profile inversion stalled near the turning point");
        const double z = pc.tt + w * w;
        const double slope = m.c(z) * pc.wratio(w);
        double wn = w - res / slope;
        if (!(wn > 0.0) || wn > 1.5 * pc.W) wn = 0.5 * (w + pc.W);
        w = wn;
      }
      const double z = pc.tt + acc.pos * acc.pos;
      prof.theta[i] = z;
      prof.eta[i] = m.c(z) * sq2p0 * std::sqrt(pc.u2(z));
      prof.u[i] = std::sqrt(0.5 * p0) * (q.I1 + acc.totals[1]);
    } else {
      double th = std::min(acc.pos + dx, m.theta0());
      for (int it = 0;; ++it) {
        acc.advance(f_th, th);
        const double res = acc.totals[0] - target;
        if (std::fabs(res) <= 1e-13 * std::max(1.0, target)) break;
        if (it > 60)
          throw ConvergenceFault("profile inversion stalled (theta phase)");
        const double slope = m.c(th) / std::sqrt(pc.u2(th));
        th -= res / slope;
      }
      prof.theta[i] = acc.pos;
      prof.eta[i] = m.c(acc.pos) * sq2p0 * std::sqrt(pc.u2(acc.pos));
      prof.u[i] = std::sqrt(0.5 * p0) * (q.I1 + acc.totals[1]);
    }
  }

  for (int i = 0; i < mid; ++i) {
    prof.theta[i] = prof.theta[n - 1 - i];
    prof.eta[i] = -prof.eta[n - 1 - i];
    prof.u[i] = ubar - prof.u[n - 1 - i];
  }
  return prof;
}

double StationaryMap::S1_from_tilde(double beta, double theta) const {
  const Material& m = *mat_;
  const Pieces pc = make_pieces(m, beta);
  const double th = std::min(std::max(theta, pc.tt), m.theta0());
  auto f_w = [&](double w) {
    const double z = pc.tt + w * w;
    return pc.wratio(w) * m.c(z) / m.g(z);
  };
  auto f_th = [&](double z) {
    return m.c(z) / (m.g(z) * std::sqrt(pc.u2(z)));
  };
  if (th <= pc.m0)
    return adaptive_gauss(f_w, 0.0, std::sqrt(th - pc.tt),
                          opt_.quad_tol_tight);
  return adaptive_gauss(f_w, 0.0, pc.W, opt_.quad_tol_tight) +
         adaptive_gauss(f_th, pc.m0, th, opt_.quad_tol_tight);
}

ConservedDrift StationaryMap::conserved_drift(
    const StationaryProfile& p) const {
  const Material& m = *mat_;
  const int n = static_cast<int>(p.x.size());
  ConservedDrift d;
  d.dH1 = 0.0;  // p is stored as the scalar p0: exactly conserved

  // S(theta~, theta_i) for all grid points in one incremental sweep over
  // the sorted thetas (S1 is a function of theta alone)
  const Pieces pc = make_pieces(m, p.beta);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return p.theta[a] < p.theta[b];
  });
  auto f_w = [&](double w) {
    const double z = pc.tt + w * w;
    return pc.wratio(w) * m.c(z) / m.g(z);
  };
  auto f_th = [&](double z) {
    return m.c(z) / (m.g(z) * std::sqrt(pc.u2(z)));
  };
  auto advance = [](auto&& f, double a, double b) {
    double total = 0.0;
    const int panels = 1 + static_cast<int>(std::fabs(b - a) / 0.05);
    for (int k = 0; k < panels; ++k)
      total += gauss(f, a + (b - a) * k / panels,
                     a + (b - a) * (k + 1) / panels, 16);
    return total;
  };
  std::vector<double> s1(n);
  bool w_phase = true;
  double pos = 0.0, acc = 0.0;
  for (int idx : order) {
    const double th =
        std::min(std::max(p.theta[idx], pc.tt), m.theta0());
    if (w_phase && th > pc.m0) {
      acc += advance(f_w, pos, pc.W);
      pos = pc.m0;
      w_phase = false;
    }
    if (w_phase) {
      const double w = std::sqrt(std::max(th - pc.tt, 0.0));
      acc += advance(f_w, pos, w);
      pos = w;
    } else {
      acc += advance(f_th, pos, th);
      pos = th;
    }
    s1[idx] = acc;
  }
  const double I1 = quartet(p.beta, opt_.quad_tol_tight).I1;

  const double H2_0 = p.eta[0] * p.eta[0] / (2.0 * m.c2(p.theta[0])) -
                      p.p0 * m.G(p.theta[0]);
  const double H3_0 = p.u[0] - std::sqrt(0.5 * p.p0) * (I1 - s1[0]);
  for (int i = 0; i < n; ++i) {
    const double H2 = p.eta[i] * p.eta[i] / (2.0 * m.c2(p.theta[i])) -
                      p.p0 * m.G(p.theta[i]);
    d.dH2 = std::max(d.dH2, std::fabs(H2 - H2_0));
    const double quad = (p.x[i] <= 0.5) ? (I1 - s1[i]) : (I1 + s1[i]);
    const double H3 = p.u[i] - std::sqrt(0.5 * p.p0) * quad;
    d.dH3 = std::max(d.dH3, std::fabs(H3 - H3_0));
  }
  return d;
}

double StationaryMap::D_tau_form(double beta, double tol) const {
  guard(beta);
  const Material& m = *mat_;
  if (!m.crossings_below(beta).empty())
    throw RangeFault("D_tau_form: valid on the first interval only");
  const double sqb = std::sqrt(beta);
  const Array2d v = adaptive_gauss(
      [&](double tau) -> Array2d {
        const double z = m.F(tau * tau - beta);
        const double cg = m.c(z) * m.g(z) / m.h(z);
        return 2.0 * Array2d(cg, m.c(z) / m.h(z));
      },
      0.0, sqb, tol);
  return v[0] * v[1];
}

double StationaryMap::ubar_by_shooting(double beta) const {
  guard(beta);
  const Material& m = *mat_;
  const double tt = m.F(-beta);
  const double th0 = m.theta0();
  const double rtol = 0.01 * opt_.ode_rtol;

  // y = (theta, eta, int 1/g); the half-orbit runs from the turning point
  auto rhs = [&](double p0) {
    return [&m, p0](double, const Vector3d& y, Vector3d& dy) {
      const double th = y[0], eta = y[1];
      const double cc2 = m.c2(th);
      dy[0] = eta / cc2;
      dy[1] = m.cp(th) / (m.c(th) * cc2) * eta * eta + m.hg(th) * p0;
      dy[2] = 1.0 / m.g(th);
    };
  };

  // unit-momentum run: the time t* to reach theta0 fixes p0 = (2 t*)^2
  // through the exact scaling (x, eta) -> (x/k, k eta), p0 -> k^2 p0
  double t_lo = 0.0, t_hi = 0.0;
  {
    Vector3d y(tt, 0.0, 0.0);
    double t = 0.0;
    const double chunk = 0.25;
    for (int i = 0; i < 4000 && y[0] < th0; ++i) {
      integrate_ode(rhs(1.0), t, t + chunk, y, rtol, 1e-14);
      t += chunk;
    }
    if (y[0] < th0)
      throw ConvergenceFault("shooting oracle: orbit never reaches theta0");
    t_hi = t;
    t_lo = t - 0.25;
  }
  auto theta_at = [&](double t) {
    Vector3d y(tt, 0.0, 0.0);
    integrate_ode(rhs(1.0), 0.0, t, y, rtol, 1e-14);
    return y[0] - th0;
  };
  const double tstar = brent_root(theta_at, std::max(t_lo, 1e-8), t_hi, 1e-13);
  double p0 = 4.0 * tstar * tstar;

  // polish p0 on the true half interval [1/2, 1]
  auto mismatch = [&](double pp) {
    Vector3d y(tt, 0.0, 0.0);
    integrate_ode(rhs(pp), 0.5, 1.0, y, rtol, 1e-14);
    return y[0] - th0;
  };
  double lo = p0 * (1.0 - 1e-3), hi = p0 * (1.0 + 1e-3);
  double flo = mismatch(lo), fhi = mismatch(hi);
  for (int k = 0; k < 60 && flo * fhi > 0.0; ++k) {
    lo *= 0.9;
    hi *= 1.1;
    flo = mismatch(lo);
    fhi = mismatch(hi);
  }
  p0 = brent_root(mismatch, lo, hi, flo, fhi, 1e-15 * std::max(1.0, p0));

  Vector3d y(tt, 0.0, 0.0);
  integrate_ode(rhs(p0), 0.5, 1.0, y, rtol, 1e-14);
  return p0 * 2.0 * y[2];
}

}  // namespace elshear
