#include "elshear/material.hpp"

#include <algorithm>
#include <cmath>

#include "elshear/quadrature.hpp"
#include "elshear/roots.hpp"

namespace elshear {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kOppositeSigns: return "gamma1 = -gamma2";
    case Regime::kEqualSigns: return "gamma1 = gamma2";
    case Regime::kDominant: return "gamma1 > |gamma2|";
    default: return "unsupported (gamma1 < |gamma2|)";
  }
}

namespace {
Regime classify(double g1, double g2) {
  const double scale = std::max({1.0, std::fabs(g1), std::fabs(g2)});
  const double tol = 1e-12 * scale;
  if (std::fabs(g1 + g2) <= tol) return Regime::kOppositeSigns;
  if (std::fabs(g1 - g2) <= tol) return Regime::kEqualSigns;
  if (g1 > std::fabs(g2) + tol) return Regime::kDominant;
  return Regime::kUnsupported;
}
}  // namespace

Material::Material(const MaterialParams& p) : Material(p, Options{}) {}

Material::Material(const MaterialParams& p, const Options& opt)
    : p_(p), opt_(opt), regime_(classify(p.gamma1(), p.gamma2())) {
  build_cache();
}

double Material::g(double th) const {
  const double s = std::sin(th), co = std::cos(th);
  return p_.alpha1 * s * s * co * co + 0.5 * (p_.alpha5 - p_.alpha2) * s * s +
         0.5 * (p_.alpha3 + p_.alpha6) * co * co + 0.5 * p_.alpha4;
}

double Material::gp(double th) const {
  return 0.5 * p_.alpha1 * std::sin(4.0 * th) +
         0.5 * (p_.alpha5 - p_.alpha2 - p_.alpha3 - p_.alpha6) *
             std::sin(2.0 * th);
}

double Material::h(double th) const {
  return 0.5 * (p_.gamma1() + p_.gamma2() * std::cos(2.0 * th));
}

double Material::hp(double th) const {
  return -p_.gamma2() * std::sin(2.0 * th);
}

double Material::c2(double th) const {
  const double s = std::sin(th), co = std::cos(th);
  return p_.K1 * co * co + p_.K3 * s * s;
}

double Material::c2p(double th) const {
  return (p_.K3 - p_.K1) * std::sin(2.0 * th);
}

double Material::cpp(double th) const {
  const double q = c2(th), qp = c2p(th);
  const double qpp = 2.0 * (p_.K3 - p_.K1) * std::cos(2.0 * th);
  return qpp / (2.0 * std::sqrt(q)) - qp * qp / (4.0 * std::pow(q, 1.5));
}

double Material::hgp(double th) const {
  const double gg = g(th);
  return (hp(th) * gg - h(th) * gp(th)) / (gg * gg);
}

double Material::damping(double th) const {
  const double hh = h(th);
  return g(th) - hh * hh / p_.gamma1();
}

double Material::chp(double th) const {
  const double hh = h(th);
  return (cp(th) * hh - c(th) * hp(th)) / (hh * hh);
}

double Material::cghp(double th) const {
  const double hh = h(th), gg = g(th), cc = c(th);
  return ((cp(th) * gg + cc * gp(th)) * hh - cc * gg * hp(th)) / (hh * hh);
}

double Material::G_exact(double th) const {
  if (th == p_.theta0) return 0.0;
  return adaptive_gauss([this](double z) { return hg(z); }, p_.theta0, th,
                        opt_.quad_tol, 32);
}

double Material::G_delta(double z0, double z1) const {
  if (z0 == z1) return 0.0;
  // short intervals: one 32-point panel of the smooth integrand is exact
  // to machine precision and free of cancellation
  if (std::fabs(z1 - z0) <= 0.5)
    return gauss([this](double z) { return hg(z); }, z0, z1, 32);
  return G(z1) - G(z0);
}

void Material::build_cache() {
  const double lo = p_.theta0 - opt_.theta_margin;
  const double hi = p_.theta0 + opt_.theta_above;
  int m = 2049;
  for (int attempt = 0; attempt < 5; ++attempt, m = 2 * m - 1) {
    Eigen::VectorXd xs(m), ys(m);
    const double dx = (hi - lo) / (m - 1);
    for (int i = 0; i < m; ++i) xs[i] = lo + i * dx;
    // anchor the cumulative sum at theta0 so that G(theta0) = 0 exactly
    int i0 = static_cast<int>(std::lround((p_.theta0 - lo) / dx));
    i0 = std::clamp(i0, 0, m - 1);
    ys[i0] = gauss([this](double z) { return hg(z); }, p_.theta0, xs[i0], 32);
    for (int i = i0 + 1; i < m; ++i)
      ys[i] = ys[i - 1] +
              gauss([this](double z) { return hg(z); }, xs[i - 1], xs[i], 32);
    for (int i = i0 - 1; i >= 0; --i)
      ys[i] = ys[i + 1] -
              gauss([this](double z) { return hg(z); }, xs[i], xs[i + 1], 32);
    spline_ = CubicSpline(xs, ys);
    // interpolation error probe at panel midpoints
    double worst = 0.0;
    for (int i = 0; i < m - 1; i += std::max(1, (m - 1) / 512)) {
      const double xm = 0.5 * (xs[i] + xs[i + 1]);
      const double exact =
          ys[i] + gauss([this](double z) { return hg(z); }, xs[i], xm, 32);
      worst = std::max(worst, std::fabs(spline_(xm) - exact));
    }
    if (worst <= opt_.cache_tol) return;
  }
  // fall through with the densest cache built; callers still get
  // G_exact-level accuracy via G_delta on short intervals
}

double Material::G(double th) const {
  if (th >= spline_.front_x() && th <= spline_.back_x()) return spline_(th);
  return G_exact(th);
}

double Material::F(double s) const {
  const Eigen::VectorXd& xs = spline_.knots();
  const Eigen::VectorXd& ys = spline_.values();
  const Eigen::Index n = xs.size();
  if (s < ys[0] || s > ys[n - 1])
    throw RangeFault("F(s): s outside the range of G on the working window");
  // bracket on the monotone knot values
  Eigen::Index lo = std::upper_bound(ys.data(), ys.data() + n, s) - ys.data();
  lo = std::clamp<Eigen::Index>(lo - 1, 0, n - 2);
  double a = xs[lo], b = xs[lo + 1];
  double fa = ys[lo] - s, fb = ys[lo + 1] - s;
  for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::fabs(a));
       ++it) {
    double mid = 0.5 * (a + b);
    // guarded Newton: G' = h/g can vanish at cusps, so floor the slope
    const double slope = std::max(hg(0.5 * (a + b)), 1e-14);
    double trial = b - fb / slope;
    if (!(trial > a && trial < b)) trial = mid;
    const double ft = spline_(trial) - s;
    if (ft == 0.0) return trial;
    if ((ft > 0) == (fb > 0)) {
      b = trial;
      fb = ft;
    } else {
      a = trial;
      fa = ft;
    }
    (void)fa;
  }
  return 0.5 * (a + b);
}

std::vector<double> Material::equilibrium_angles(double lo, double hi) const {
  std::vector<double> out;
  if (regime_ == Regime::kDominant) return out;
  if (regime_ == Regime::kUnsupported)
    throw Fault("equilibria: regime gamma1 < |gamma2| is unsupported");
  const double offset = (regime_ == Regime::kOppositeSigns) ? 0.0 : kPi / 2.0;
  const long k0 = static_cast<long>(std::ceil((lo - offset) / kPi));
  for (long k = k0; offset + k * kPi <= hi; ++k)
    out.push_back(offset + k * kPi);
  return out;
}

EquilibriumSet Material::equilibria(double lo, double hi) const {
  EquilibriumSet set;
  set.regime = regime_;
  set.angles = equilibrium_angles(lo, hi);
  for (double e : set.angles) {
    if (e < spline_.front_x() || e > spline_.back_x()) continue;
    const double beta = -G(e);
    if (beta > 0.0) {
      set.poles.push_back(beta);
      set.pole_angles.push_back(e);
    }
  }
  // G is increasing, so descending angles give ascending poles
  std::reverse(set.poles.begin(), set.poles.end());
  std::reverse(set.pole_angles.begin(), set.pole_angles.end());
  return set;
}

std::vector<double> Material::crossings_below(double beta) const {
  std::vector<double> out;
  if (regime_ == Regime::kDominant) return out;
  for (double e : equilibrium_angles(spline_.front_x(), p_.theta0)) {
    const double b = -G(e);
    if (b > 0.0 && b < beta) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ValidationReport Material::validate() const {
  ValidationReport rep;
  const double g1 = p_.gamma1(), g2 = p_.gamma2();
  const double scale =
      std::max({1.0, std::fabs(p_.alpha2), std::fabs(p_.alpha3),
                std::fabs(p_.alpha5), std::fabs(p_.alpha6)});
  auto add = [&rep](const std::string& name, bool pass, double margin) {
    rep.checks.push_back({name, pass, margin});
  };

  const double rel = p_.alpha2 + p_.alpha3 - (p_.alpha6 - p_.alpha5);
  add("alpha2+alpha3 = alpha6-alpha5", std::fabs(rel) <= 1e-12 * scale,
      -std::fabs(rel));
  add("alpha4 > 0", p_.alpha4 > 0.0, p_.alpha4);
  const double visc =
      2.0 * p_.alpha1 + 3.0 * p_.alpha4 + 2.0 * p_.alpha5 + 2.0 * p_.alpha6;
  add("2a1+3a4+2a5+2a6 > 0", visc > 0.0, visc);
  add("gamma1 > 0", g1 > 0.0, g1);
  const double tw = 2.0 * p_.alpha4 + p_.alpha5 + p_.alpha6;
  add("2a4+a5+a6 > 0", tw > 0.0, tw);
  const double quad =
      4.0 * g1 * tw - std::pow(p_.alpha2 + p_.alpha3 + g2, 2);
  add("4*gamma1*(2a4+a5+a6) > (a2+a3+gamma2)^2", quad > 0.0, quad);
  add("K1 > 0", p_.K1 > 0.0, p_.K1);
  add("K3 > 0", p_.K3 > 0.0, p_.K3);

  // damping floor Cbar: dense scan over one period plus golden refinement
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  const int m = 2048;
  for (int i = 0; i <= m; ++i) {
    const double th = kPi * i / m;
    const double v = damping(th);
    if (v < best) {
      best = v;
      arg = th;
    }
  }
  const double a = arg - 2.0 * kPi / m, b = arg + 2.0 * kPi / m;
  const double refined =
      golden_min([this](double t) { return damping(t); }, a, b, 1e-12);
  rep.damping_floor = std::min(best, damping(refined));
  add("min(g - h^2/gamma1) > 0", rep.damping_floor > 0.0, rep.damping_floor);

  add("regime supported (gamma1 >= |gamma2|)", regime_ != Regime::kUnsupported,
      g1 - std::fabs(g2));

  double theta0_dist = std::numeric_limits<double>::infinity();
  if (regime_ == Regime::kOppositeSigns || regime_ == Regime::kEqualSigns) {
    const double offset =
        (regime_ == Regime::kOppositeSigns) ? 0.0 : kPi / 2.0;
    const double r = std::remainder(p_.theta0 - offset, kPi);
    theta0_dist = std::fabs(r);
  }
  add("theta0 away from equilibria", theta0_dist > 1e-8, theta0_dist - 1e-8);

  rep.ok = std::all_of(rep.checks.begin(), rep.checks.end(),
                       [](const ValidationCheck& c) { return c.pass; });
  return rep;
}

}  // namespace elshear
