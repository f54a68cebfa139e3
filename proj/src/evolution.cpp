#include "elshear/evolution.hpp"

#include <cmath>
#include <random>

#include "elshear/spline.hpp"

namespace elshear {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace detail {

void block_thomas_solve(std::vector<Matrix2d>& lower,
                        std::vector<Matrix2d>& diag,
                        std::vector<Matrix2d>& upper,
                        std::vector<Vector2d>& rhs) {
  const size_t m = diag.size();
  for (size_t i = 1; i < m; ++i) {
    const Matrix2d f = lower[i] * diag[i - 1].inverse();
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  rhs[m - 1] = diag[m - 1].inverse() * rhs[m - 1];
  for (size_t i = m - 1; i-- > 0;)
    rhs[i] = diag[i].inverse() * (rhs[i] - upper[i] * rhs[i + 1]);
}

}  // namespace detail

NonlinearEvolution::NonlinearEvolution(const Material& mat, double ubar,
                                       int n, double dt, bool implicit)
    : mat_(&mat), ubar_(ubar), n_(n), implicit_(implicit) {
  if (n < 65 || n % 2 == 0)
    throw RangeFault("evolution grid must be odd and >= 65");
  dx_ = 1.0 / (n - 1);
  x_ = VectorXd::LinSpaced(n, 0.0, 1.0);
  u_ = ubar_ * x_;
  theta_ = VectorXd::Constant(n, mat.theta0());
  if (dt > 0.0) {
    dt_ = dt;
  } else if (implicit_) {
    dt_ = dx_;
  } else {
    double maxdiff = 0.0;
    for (double th = 0.0; th < kPi; th += 0.01)
      maxdiff = std::max({maxdiff, mat.g(th),
                          mat.c2(th) / mat.gamma1()});
    dt_ = 0.25 * dx_ * dx_ / maxdiff;
  }
}

void NonlinearEvolution::set_fields(const VectorXd& u, const VectorXd& theta) {
  if (u.size() != n_ || theta.size() != n_)
    throw RangeFault("set_fields: size mismatch");
  u_ = u;
  theta_ = theta;
  u_[0] = 0.0;
  u_[n_ - 1] = ubar_;
  theta_[0] = theta_[n_ - 1] = mat_->theta0();
}

void NonlinearEvolution::step() {
  if (implicit_) step_implicit();
  else step_explicit();
  t_ += dt_;
}

void NonlinearEvolution::advance(double T) {
  const long steps = static_cast<long>(std::ceil(T / dt_ - 1e-12));
  for (long k = 0; k < steps; ++k) step();
}

void NonlinearEvolution::step_implicit() {
  const Material& mat = *mat_;
  const double g1 = mat.gamma1();
  const int m = n_ - 2;
  const double idx2 = 1.0 / (dx_ * dx_);
  const double ic = 1.0 / (2.0 * dx_ * dt_);

  std::vector<Matrix2d> L(m, Matrix2d::Zero()), D(m, Matrix2d::Zero()),
      R(m, Matrix2d::Zero());
  std::vector<Vector2d> rhs(m, Vector2d::Zero());

  // unknown block v_j = (u_j, theta_j); coefficients frozen at theta^n
  for (int j = 1; j <= n_ - 2; ++j) {
    const int i = j - 1;
    const double cj = mat.c(theta_[j]);
    const double cm = mat.c(0.5 * (theta_[j] + theta_[j - 1]));
    const double cp = mat.c(0.5 * (theta_[j] + theta_[j + 1]));
    const double gm = mat.g(0.5 * (theta_[j] + theta_[j - 1]));
    const double gp = mat.g(0.5 * (theta_[j] + theta_[j + 1]));
    const double hj = mat.h(theta_[j]);
    const double hm = mat.h(theta_[j - 1]);
    const double hp = mat.h(theta_[j + 1]);

    // u-row
    D[i](0, 0) = 1.0 / dt_ + (gp + gm) * idx2;
    L[i](0, 0) = -gm * idx2;
    R[i](0, 0) = -gp * idx2;
    L[i](0, 1) = hm * ic;
    R[i](0, 1) = -hp * ic;
    rhs[i][0] = u_[j] / dt_ - (hp * theta_[j + 1] - hm * theta_[j - 1]) * ic;

    // theta-row
    D[i](1, 1) = g1 / dt_ + cj * (cp + cm) * idx2;
    L[i](1, 1) = -cj * cm * idx2;
    R[i](1, 1) = -cj * cp * idx2;
    L[i](1, 0) = -hj / (2.0 * dx_);
    R[i](1, 0) = hj / (2.0 * dx_);
    rhs[i][1] = g1 * theta_[j] / dt_;

    // pinned boundary values move to the right-hand side
    if (j == 1) {
      rhs[i][0] -= L[i](0, 0) * u_[0] + L[i](0, 1) * theta_[0];
      rhs[i][1] -= L[i](1, 0) * u_[0] + L[i](1, 1) * theta_[0];
      L[i].setZero();
    }
    if (j == n_ - 2) {
      rhs[i][0] -= R[i](0, 0) * u_[n_ - 1] + R[i](0, 1) * theta_[n_ - 1];
      rhs[i][1] -= R[i](1, 0) * u_[n_ - 1] + R[i](1, 1) * theta_[n_ - 1];
      R[i].setZero();
    }
  }

  detail::block_thomas_solve(L, D, R, rhs);
  for (int j = 1; j <= n_ - 2; ++j) {
    u_[j] = rhs[j - 1][0];
    theta_[j] = rhs[j - 1][1];
  }
}

void NonlinearEvolution::step_explicit() {
  const Material& mat = *mat_;
  const double g1 = mat.gamma1();
  const double idx2 = 1.0 / (dx_ * dx_);
  VectorXd C(n_), unew = u_, tnew = theta_;

  for (int j = 1; j <= n_ - 2; ++j) {
    const double cj = mat.c(theta_[j]);
    const double cm = mat.c(0.5 * (theta_[j] + theta_[j - 1]));
    const double cp = mat.c(0.5 * (theta_[j] + theta_[j + 1]));
    C[j] = cj * (cp * (theta_[j + 1] - theta_[j]) -
                 cm * (theta_[j] - theta_[j - 1])) * idx2;
  }
  C[0] = 2.0 * C[1] - C[2];
  C[n_ - 1] = 2.0 * C[n_ - 2] - C[n_ - 3];

  for (int j = 1; j <= n_ - 2; ++j) {
    const double ux = (u_[j + 1] - u_[j - 1]) / (2.0 * dx_);
    tnew[j] = theta_[j] + dt_ * (C[j] - mat.h(theta_[j]) * ux) / g1;
  }
  // u_t = ((g - h^2/g1) u_x)_x + ((h/g1) C)_x
  auto a_of = [&](double th) {
    const double hh = mat.h(th);
    return mat.g(th) - hh * hh / g1;
  };
  for (int j = 1; j <= n_ - 2; ++j) {
    const double am = a_of(0.5 * (theta_[j] + theta_[j - 1]));
    const double ap = a_of(0.5 * (theta_[j] + theta_[j + 1]));
    const double diff = (ap * (u_[j + 1] - u_[j]) -
                         am * (u_[j] - u_[j - 1])) * idx2;
    const double coup = (mat.h(theta_[j + 1]) * C[j + 1] -
                         mat.h(theta_[j - 1]) * C[j - 1]) /
                        (2.0 * dx_ * g1);
    unew[j] = u_[j] + dt_ * (diff + coup);
  }
  u_ = unew;
  theta_ = tnew;
}

LinearizedEvolution::LinearizedEvolution(const Material& mat,
                                         const StationaryProfile& bg, int n,
                                         double dt, bool implicit)
    : mat_(&mat), n_(n), implicit_(implicit), p0_(bg.p0) {
  if (n < 65 || n % 2 == 0)
    throw RangeFault("evolution grid must be odd and >= 65");
  dx_ = 1.0 / (n - 1);
  x_ = VectorXd::LinSpaced(n, 0.0, 1.0);
  U_ = VectorXd::Zero(n);
  Theta_ = VectorXd::Zero(n);
  thb_.resize(n);
  uxb_.resize(n);
  if (bg.x.size() == n) {
    thb_ = bg.theta;
  } else {
    const CubicSpline s(bg.x, bg.theta);
    for (int j = 0; j < n; ++j) thb_[j] = s(x_[j]);
  }
  for (int j = 0; j < n; ++j) uxb_[j] = p0_ / mat.g(thb_[j]);
  if (dt > 0.0) {
    dt_ = dt;
  } else if (implicit_) {
    dt_ = dx_;
  } else {
    double maxdiff = 0.0;
    for (int j = 0; j < n; ++j)
      maxdiff = std::max({maxdiff, mat.g(thb_[j]),
                          mat.c2(thb_[j]) / mat.gamma1()});
    dt_ = 0.25 * dx_ * dx_ / maxdiff;
  }
}

void LinearizedEvolution::set_fields(const VectorXd& U, const VectorXd& Th) {
  if (U.size() != n_ || Th.size() != n_)
    throw RangeFault("set_fields: size mismatch");
  U_ = U;
  Theta_ = Th;
  U_[0] = U_[n_ - 1] = 0.0;
  Theta_[0] = Theta_[n_ - 1] = 0.0;
}

void LinearizedEvolution::step() {
  if (implicit_) step_implicit();
  else step_explicit();
  t_ += dt_;
}

void LinearizedEvolution::advance(double T) {
  const long steps = static_cast<long>(std::ceil(T / dt_ - 1e-12));
  for (long k = 0; k < steps; ++k) step();
}

void LinearizedEvolution::step_implicit() {
  const Material& mat = *mat_;
  const double g1 = mat.gamma1();
  const int m = n_ - 2;
  const double idx2 = 1.0 / (dx_ * dx_);
  const double ic = 1.0 / (2.0 * dx_ * dt_);

  std::vector<Matrix2d> L(m, Matrix2d::Zero()), D(m, Matrix2d::Zero()),
      R(m, Matrix2d::Zero());
  std::vector<Vector2d> rhs(m, Vector2d::Zero());

  for (int j = 1; j <= n_ - 2; ++j) {
    const int i = j - 1;
    const double th = thb_[j];
    const double cj = mat.c(th);
    const double cm = mat.c(thb_[j - 1]);
    const double cp = mat.c(thb_[j + 1]);
    const double gm = mat.g(0.5 * (th + thb_[j - 1]));
    const double gp = mat.g(0.5 * (th + thb_[j + 1]));
    const double hj = mat.h(th);
    const double hm = mat.h(thb_[j - 1]);
    const double hp = mat.h(thb_[j + 1]);
    // c'(theta)(c theta_x)_x - h' u_x along the background, with the
    // closed form (c theta_x)_x = h p0 / (g c)
    const double dj = mat.cp(th) * hj * p0_ / (mat.g(th) * cj) -
                      mat.hp(th) * uxb_[j];
    const double wm = mat.gp(thb_[j - 1]) * uxb_[j - 1];
    const double wp = mat.gp(thb_[j + 1]) * uxb_[j + 1];

    // U-row
    D[i](0, 0) = 1.0 / dt_ + (gp + gm) * idx2;
    L[i](0, 0) = -gm * idx2;
    R[i](0, 0) = -gp * idx2;
    L[i](0, 1) = hm * ic + wm / (2.0 * dx_);
    R[i](0, 1) = -hp * ic - wp / (2.0 * dx_);
    rhs[i][0] =
        U_[j] / dt_ - (hp * Theta_[j + 1] - hm * Theta_[j - 1]) * ic;

    // Theta-row
    D[i](1, 1) = g1 / dt_ + 2.0 * cj * cj * idx2 - dj;
    L[i](1, 1) = -cj * cm * idx2;
    R[i](1, 1) = -cj * cp * idx2;
    L[i](1, 0) = -hj / (2.0 * dx_);
    R[i](1, 0) = hj / (2.0 * dx_);
    rhs[i][1] = g1 * Theta_[j] / dt_;
    // zero Dirichlet data: no boundary contributions
    if (j == 1) L[i].setZero();
    if (j == n_ - 2) R[i].setZero();
  }

  detail::block_thomas_solve(L, D, R, rhs);
  for (int j = 1; j <= n_ - 2; ++j) {
    U_[j] = rhs[j - 1][0];
    Theta_[j] = rhs[j - 1][1];
  }
}

void LinearizedEvolution::step_explicit() {
  const Material& mat = *mat_;
  const double g1 = mat.gamma1();
  const double idx2 = 1.0 / (dx_ * dx_);
  VectorXd Unew = U_, Tnew = Theta_;
  for (int j = 1; j <= n_ - 2; ++j) {
    const double th = thb_[j];
    const double cj = mat.c(th);
    const double dj = mat.cp(th) * mat.h(th) * p0_ / (mat.g(th) * cj) -
                      mat.hp(th) * uxb_[j];
    const double lap = (mat.c(thb_[j + 1]) * Theta_[j + 1] -
                        2.0 * cj * Theta_[j] +
                        mat.c(thb_[j - 1]) * Theta_[j - 1]) * idx2;
    const double Ux = (U_[j + 1] - U_[j - 1]) / (2.0 * dx_);
    Tnew[j] = Theta_[j] +
              dt_ * (cj * lap + dj * Theta_[j] - mat.h(th) * Ux) / g1;
  }
  for (int j = 1; j <= n_ - 2; ++j) {
    const double gm = mat.g(0.5 * (thb_[j] + thb_[j - 1]));
    const double gp = mat.g(0.5 * (thb_[j] + thb_[j + 1]));
    const double diff = (gp * (U_[j + 1] - U_[j]) -
                         gm * (U_[j] - U_[j - 1])) * idx2;
    auto flux = [&](int k) {
      const double tdot = (Tnew[k] - Theta_[k]) / dt_;
      return mat.gp(thb_[k]) * uxb_[k] * Theta_[k] + mat.h(thb_[k]) * tdot;
    };
    const double coup = (flux(j + 1) - flux(j - 1)) / (2.0 * dx_);
    Unew[j] = U_[j] + dt_ * (diff + coup);
  }
  U_ = Unew;
  Theta_ = Tnew;
}

double LinearizedEvolution::energy(double b, bool c_squared) const {
  VectorXd tx(n_);
  tx[0] = (-1.5 * Theta_[0] + 2.0 * Theta_[1] - 0.5 * Theta_[2]) / dx_;
  for (int j = 1; j <= n_ - 2; ++j)
    tx[j] = (Theta_[j + 1] - Theta_[j - 1]) / (2.0 * dx_);
  tx[n_ - 1] = (1.5 * Theta_[n_ - 1] - 2.0 * Theta_[n_ - 2] +
                0.5 * Theta_[n_ - 3]) / dx_;
  const double g1 = mat_->gamma1();
  double sum = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double w = c_squared ? mat_->c2(thb_[j]) : mat_->c(thb_[j]);
    const double val = U_[j] * U_[j] + b * g1 * Theta_[j] * Theta_[j] +
                       w * tx[j] * tx[j];
    sum += (j == 0 || j == n_ - 1) ? 0.5 * val : val;
  }
  return sum * dx_;
}

double admissible_b(const Material& mat, const StationaryProfile& profile,
                    double eps) {
  const double g1 = mat.gamma1();
  if (!(eps > 0.0 && eps < g1))
    throw RangeFault("admissible_b: need 0 < eps < gamma1");
  double lo = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < profile.x.size(); ++j) {
    const double th = profile.theta[j];
    const double hh = mat.h(th), gg = mat.g(th);
    const double sigma = (eps + hh * hh / (g1 - eps)) / gg;
    lo = std::min(lo, (1.0 - sigma) * gg);
  }
  if (!(lo > 0.0))
    throw RangeFault("admissible_b: (1 - sigma) g is not positive");
  return 0.9 * 0.5 * lo;
}

VectorXd sine_perturbation(const VectorXd& x, int modes, std::uint64_t seed,
                           double amplitude) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXd v = VectorXd::Zero(x.size());
  for (int k = 1; k <= modes; ++k) {
    const double a = gauss(rng) / (static_cast<double>(k) * k);
    for (Eigen::Index j = 0; j < x.size(); ++j)
      v[j] += a * std::sin(k * kPi * x[j]);
  }
  const double mag = v.cwiseAbs().maxCoeff();
  if (mag > 0.0) v *= amplitude / mag;
  return v;
}

DecayReport decay_report(const Material& mat, const StationaryProfile& bg,
                         double T, std::uint64_t seed, int n,
                         double b_override) {
  DecayReport rep;
  rep.ubar = bg.ubar;
  rep.beta = bg.beta;
  rep.eps = bg.ubar;
  rep.seed = seed;
  if (b_override > 0.0) {
    rep.b = b_override;
  } else {
    try {
      rep.b = admissible_b(mat, bg, std::min(rep.eps, 0.5 * mat.gamma1()));
    } catch (const Fault&) {
      // outside the small-ubar theorem: any positive weight still
      // classifies growth vs decay
      rep.b = 0.1;
    }
  }

  LinearizedEvolution evo(mat, bg, n);
  evo.set_fields(sine_perturbation(evo.x(), 16, seed, 1e-2),
                 sine_perturbation(evo.x(), 16, seed + 1, 1e-2));
  rep.trace.emplace_back(0.0, evo.energy(rep.b));
  const long steps = static_cast<long>(std::ceil(T / evo.dt() - 1e-12));
  for (long k = 0; k < steps; ++k) {
    evo.step();
    rep.trace.emplace_back(evo.t(), evo.energy(rep.b));
  }

  // least-squares slope of log E on the second half of the trace
  const size_t half = rep.trace.size() / 2;
  double st = 0, se = 0, stt = 0, ste = 0;
  size_t cnt = 0;
  for (size_t k = half; k < rep.trace.size(); ++k) {
    if (rep.trace[k].second <= 0.0) continue;
    const double tt = rep.trace[k].first, le = std::log(rep.trace[k].second);
    st += tt;
    se += le;
    stt += tt * tt;
    ste += tt * le;
    ++cnt;
  }
  const double denom = cnt * stt - st * st;
  const double slope = (denom != 0.0) ? (cnt * ste - st * se) / denom : 0.0;
  rep.L_fit = -slope;

  rep.monotone_after_transient = true;
  for (size_t k = 1; k + 1 < rep.trace.size(); ++k) {
    if (rep.trace[k + 1].second > rep.trace[k].second * (1.0 + 1e-12)) {
      rep.monotone_after_transient = false;
      break;
    }
  }
  rep.passed = rep.monotone_after_transient && rep.L_fit > 0.0;

  // the proof-side bounds r1, r2, r3, for comparison only
  double cl = std::numeric_limits<double>::infinity(), cu = 0.0;
  double minsg = std::numeric_limits<double>::infinity();
  const double g1 = mat.gamma1();
  const double eps = std::min(rep.eps, 0.5 * g1);
  for (int j = 0; j < evo.n(); ++j) {
    const double th = evo.theta_bg()[j];
    cl = std::min(cl, mat.c(th));
    cu = std::max(cu, mat.c(th));
    const double hh = mat.h(th), gg = mat.g(th);
    minsg = std::min(minsg, (1.0 - (eps + hh * hh / (g1 - eps)) / gg) * gg);
  }
  rep.r1 = 0.5 * minsg - rep.b;
  rep.r2 = (-eps * rep.b - 2.0 * eps + 0.125 * rep.b * cl * cl) / (g1 * rep.b);
  rep.r3 = 0.5 * rep.b * cl * cl / cu;
  return rep;
}

SmallUbarBounds small_ubar_bounds(const Material& mat,
                                  const StationaryProfile& p) {
  SmallUbarBounds out;
  for (Eigen::Index j = 0; j < p.x.size(); ++j) {
    const double th = p.theta[j];
    const double ux = p.p0 / mat.g(th);
    const double tx = p.eta[j] / mat.c2(th);
    const double txx = (mat.hg(th) * p.p0 / mat.c(th) -
                        mat.cp(th) * tx * tx) / mat.c(th);
    out.max_ux = std::max(out.max_ux, std::fabs(ux));
    out.max_thetax = std::max(out.max_thetax, std::fabs(tx));
    out.max_thetaxx = std::max(out.max_thetaxx, std::fabs(txx));
  }
  out.ratio_ux = out.max_ux / p.ubar;
  out.ratio_thetax = out.max_thetax / p.ubar;
  out.ratio_thetaxx = out.max_thetaxx / p.ubar;
  return out;
}

}  // namespace elshear
