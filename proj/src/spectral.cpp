#include "elshear/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elshear/ode.hpp"
#include "elshear/roots.hpp"

namespace elshear {

using Eigen::Matrix4d;
using Eigen::Vector4d;
using Eigen::VectorXd;

namespace {
constexpr double kRescaleThreshold = 1e100;
}

LinearizedSystem::LinearizedSystem(const Material& mat,
                                   const StationaryProfile& p)
    : mat_(&mat),
      theta_s_(p.x, p.theta),
      eta_s_(p.x, p.eta),
      beta_(p.beta),
      p0_(p.p0),
      ubar_(p.ubar) {}

double LinearizedSystem::theta_x(double x) const {
  return eta_s_(x) / mat_->c2(theta_s_(x));
}

double LinearizedSystem::u_x(double x) const {
  return p0_ / mat_->g(theta_s_(x));
}

double LinearizedSystem::b1(double x) const {
  const double th = theta_s_(x);
  const double tx = theta_x(x);
  // (h/g)'(theta) p + (c c'' - 3 c'^2) theta_x^2, with p = g u_x = p0
  return mat_->hgp(th) * p0_ +
         (mat_->c(th) * mat_->cpp(th) - 3.0 * mat_->cp(th) * mat_->cp(th)) *
             tx * tx;
}

double LinearizedSystem::b2(double x) const {
  const double th = theta_s_(x);
  const double hh = mat_->h(th);
  return mat_->gamma1() - hh * hh / mat_->g(th);
}

Matrix4d LinearizedSystem::A(double x) const {
  const Material& m = *mat_;
  const double th = theta_s_(x);
  const double tx = theta_x(x);
  const double cratio = m.cp(th) * tx / m.c(th);
  Matrix4d a = Matrix4d::Zero();
  a(0, 1) = 1.0 / m.g(th);
  a(0, 2) = -m.gp(th) * u_x(x) / m.g(th);
  a(2, 2) = -2.0 * cratio;
  a(2, 3) = 1.0 / m.c2(th);
  a(3, 1) = m.hg(th);
  a(3, 2) = b1(x);
  a(3, 3) = 2.0 * cratio;
  return a;
}

Matrix4d LinearizedSystem::B(double x) const {
  const Material& m = *mat_;
  const double th = theta_s_(x);
  Matrix4d b = Matrix4d::Zero();
  b(0, 2) = -m.hg(th);
  b(1, 0) = 1.0;
  b(3, 2) = b2(x);
  return b;
}

LinearizedSystem build_linearization(const Material& mat,
                                     const StationaryProfile& p) {
  const int n = static_cast<int>(p.x.size());
  if (n < 65 || n % 2 == 0)
    throw Fault("build_linearization: malformed profile grid");
  const double tol = 1e-6 * std::max(1.0, p.ubar);
  const int mid = (n - 1) / 2;
  auto reject = [](const std::string& what) {
    throw Fault("build_linearization: profile rejected (" + what + ")");
  };
  if (std::fabs(p.u[0]) > tol || std::fabs(p.u[n - 1] - p.ubar) > tol)
    reject("u boundary values");
  if (std::fabs(p.theta[0] - mat.params().theta0) > 1e-6 ||
      std::fabs(p.theta[n - 1] - mat.params().theta0) > 1e-6)
    reject("theta boundary values");
  if (std::fabs(p.eta[mid]) > 1e-8) reject("eta(1/2) != 0");
  double sym = 0.0;
  for (int i = 0; i < n; ++i)
    sym = std::max(sym, std::fabs(p.theta[i] - p.theta[n - 1 - i]));
  if (sym > 1e-8) reject("theta symmetry");
  const double level = p.p0 * p.beta;
  for (int i = 0; i < n; i += std::max(1, n / 64)) {
    const double H2 = p.eta[i] * p.eta[i] / (2.0 * mat.c2(p.theta[i])) -
                      p.p0 * mat.G(p.theta[i]);
    if (std::fabs(H2 - level) > 1e-6 * std::max(1.0, std::fabs(level)))
      reject("Hamiltonian level");
  }
  return LinearizedSystem(mat, p);
}

namespace {

using State8 = Eigen::Matrix<double, 8, 1>;

struct PairShot {
  State8 y;
  double log_scale = 0.0;
  long steps = 0;
  double max_err = 0.0;
};

// integrate the (Z_a | Z_b) pair of the eigenvalue ODE between
// check-points, renormalizing both columns together on overflow
PairShot shoot_pair(const LinearizedSystem& sys, double lambda, State8 y0,
                    const std::vector<double>& xs, double rtol,
                    std::vector<State8>* samples) {
  PairShot shot{y0, 0.0, 0, 0.0};
  auto rhs = [&sys, lambda](double x, const State8& y, State8& dy) {
    const Matrix4d M = sys.A(x) + lambda * sys.B(x);
    dy.segment<4>(0) = M * y.segment<4>(0);
    dy.segment<4>(4) = M * y.segment<4>(4);
  };
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    OdeStats st = integrate_ode(rhs, xs[i], xs[i + 1], shot.y, rtol, 1e-13);
    shot.steps += st.steps;
    shot.max_err = std::max(shot.max_err, st.max_local_error);
    const double mag = shot.y.cwiseAbs().maxCoeff();
    if (mag > kRescaleThreshold) {
      shot.y /= mag;
      shot.log_scale += std::log(mag);
    }
    if (samples) samples->push_back(shot.y);
  }
  return shot;
}

double det_at(const State8& fwd, const State8& bwd) {
  Matrix4d m;
  m.col(0) = fwd.segment<4>(0);
  m.col(1) = fwd.segment<4>(4);
  m.col(2) = bwd.segment<4>(0);
  m.col(3) = bwd.segment<4>(4);
  return m.determinant();
}

}  // namespace

EvansEvaluation evans(const LinearizedSystem& sys, double lambda,
                      double rtol) {
  State8 yf, yb;
  yf << 0, 1, 0, 0, 0, 0, 0, 1;  // Z1(0), Z2(0)
  yb << 0, 1, 0, 0, 0, 0, 0, 1;  // Z3(1), Z4(1)

  const std::vector<double> fwd_xs{0.0, 0.25, 0.5, 0.75};
  const std::vector<double> bwd_xs{1.0, 0.75, 0.5, 0.25};
  std::vector<State8> fs, bs;
  PairShot f = shoot_pair(sys, lambda, yf, fwd_xs, rtol, &fs);
  PairShot b = shoot_pair(sys, lambda, yb, bwd_xs, rtol, &bs);

  // fs = {0.25, 0.5, 0.75}, bs = {0.75, 0.5, 0.25}
  const double scale = std::exp(f.log_scale + b.log_scale);
  const double e_mid = det_at(fs[1], bs[1]) * scale;
  const double e_lo = det_at(fs[0], bs[2]) * scale;
  const double e_hi = det_at(fs[2], bs[0]) * scale;

  EvansEvaluation ev;
  ev.lambda = lambda;
  ev.beta = sys.beta();
  ev.E = e_mid;
  ev.x_residual = std::max(std::fabs(e_lo - e_mid), std::fabs(e_hi - e_mid));
  ev.steps = f.steps + b.steps;
  ev.max_local_error = std::max(f.max_err, b.max_err);
  return ev;
}

ZeroIdentity evans_zero_identity(const LinearizedSystem& sys,
                                 const StationaryMap& map) {
  ZeroIdentity out;
  out.E0 = evans(sys, 0.0).E;
  const double beta = sys.beta();
  const double dp = map.D_prime(beta, map.options().quad_tol_tight);
  const double c2 = map.material().c2(map.material().theta0());
  out.rhs = -2.0 * beta / (sys.p0() * c2) * dp;
  out.gap = std::fabs(out.E0 - out.rhs) /
            std::max({std::fabs(out.E0), std::fabs(out.rhs), 1e-300});
  return out;
}

namespace {

using State24 = Eigen::Matrix<double, 24, 1>;

// Phi (row-major, 16) plus the two variation-of-parameters quadrature
// vectors q1 = int Phi^{-1} B Phi e2 and q2 = int Phi^{-1} B Phi e4.
// Phi^{-1} uses the paper's adjugate display (valid since det Phi = 1).
void monodromy_rhs(const LinearizedSystem& sys, double x, const State24& y,
                   State24& dy) {
  Matrix4d phi;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) phi(r, c) = y[4 * r + c];
  const Matrix4d a = sys.A(x);
  const Matrix4d dphi = a * phi;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) dy[4 * r + c] = dphi(r, c);

  const double T12 = phi(0, 1), T13 = phi(0, 2), T14 = phi(0, 3);
  const double T32 = phi(2, 1), T33 = phi(2, 2), T34 = phi(2, 3);
  const double T42 = phi(3, 1), T43 = phi(3, 2), T44 = phi(3, 3);
  const double b2v = sys.b2(x);
  const double hg = sys.material().hg(sys.theta(x));
  const double J = T12 * (T33 * T44 - T34 * T43) -
                   T13 * (T32 * T44 - T34 * T42) +
                   T14 * (T32 * T43 - T33 * T42);
  const double K13 = -hg + b2v * (T13 * T34 - T14 * T33);
  const double K31 = T34 * T42 - T32 * T44;
  const double K33 = -b2v * T34;
  const double K41 = T32 * T43 - T33 * T42;
  const double K43 = b2v * T33;

  dy[16] = -T12 * J + T32 * K13;
  dy[17] = T12;
  dy[18] = T12 * K31 + T32 * K33;
  dy[19] = T12 * K41 + T32 * K43;
  dy[20] = -T14 * J + T34 * K13;
  dy[21] = T14;
  dy[22] = T14 * K31 + T34 * K33;
  dy[23] = T14 * K41 + T34 * K43;
}

struct MonodromyRun {
  Matrix4d Phi1;
  Vector4d q1, q2;
};

MonodromyRun run_monodromy(const LinearizedSystem& sys, double rtol) {
  State24 y = State24::Zero();
  y[0] = y[5] = y[10] = y[15] = 1.0;
  auto rhs = [&sys](double x, const State24& yy, State24& dyy) {
    monodromy_rhs(sys, x, yy, dyy);
  };
  integrate_ode(rhs, 0.0, 1.0, y, rtol, 1e-13);
  MonodromyRun out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.Phi1(r, c) = y[4 * r + c];
  out.q1 = y.segment<4>(16);
  out.q2 = y.segment<4>(20);
  return out;
}

}  // namespace

MonodromyResult monodromy(const LinearizedSystem& sys,
                          const StationaryMap& map) {
  const MonodromyRun run = run_monodromy(sys, 1e-11);
  MonodromyResult res;
  res.Phi1 = run.Phi1;
  res.det_residual = std::fabs(run.Phi1.determinant() - 1.0);
  res.evans0 = -run.Phi1(0, 1) * run.Phi1(2, 3) +
               run.Phi1(0, 3) * run.Phi1(2, 1);

  const Material& m = map.material();
  const double beta = sys.beta();
  const Quartet q = map.quartet(beta, map.options().quad_tol_tight);
  const double p0 = 2.0 * q.Ig * q.Ig;
  const double th0 = m.theta0();
  const double c0 = m.c(th0), g0 = m.g(th0), h0 = m.h(th0);
  const double sqb = std::sqrt(beta);
  const double sq2p0 = std::sqrt(2.0 * p0);
  const double r2p0 = std::sqrt(2.0 / p0);

  res.T32_cf = sqb / (c0 * sq2p0) + 2.0 * g0 * beta / (h0 * p0) -
               2.0 * std::pow(beta, 1.5) / (c0 * p0) * q.IMg;
  res.T14_cf = 2.0 * sqb / c0 * q.IM - 2.0 * sqb / (c0 * g0) * q.IMg;
  res.T34_cf = 2.0 * r2p0 * g0 * sqb / (c0 * h0) -
               2.0 * r2p0 * beta / (c0 * c0) * q.IMg;
  res.T12_cf = 0.5 / g0 + q.I1 / sq2p0 + r2p0 * beta * q.IM -
               r2p0 * beta / g0 * q.IMg;
  return res;
}

LambdaDerivative evans_lambda_derivative(const LinearizedSystem& sys,
                                         double fd_step, double rtol) {
  LambdaDerivative out;
  // centered differences with a Richardson step-halving pass
  const double d = fd_step;
  const double f1 =
      (evans(sys, d, rtol).E - evans(sys, -d, rtol).E) / (2.0 * d);
  const double f2 = (evans(sys, 0.5 * d, rtol).E -
                     evans(sys, -0.5 * d, rtol).E) / d;
  out.fd = (4.0 * f2 - f1) / 3.0;

  const MonodromyRun run = run_monodromy(sys, 0.1 * rtol);
  const Vector4d z1l = run.Phi1 * run.q1;
  const Vector4d z2l = run.Phi1 * run.q2;
  const double T12 = run.Phi1(0, 1), T14 = run.Phi1(0, 3);
  const double T32 = run.Phi1(2, 1), T34 = run.Phi1(2, 3);
  out.vp = -z1l[0] * T34 + z1l[2] * T14 - z2l[2] * T12 + z2l[0] * T32;

  const double scale = std::max(std::fabs(out.fd), std::fabs(out.vp));
  if (scale < 1e-10)
    throw DegenerateFault("E_lambda vanishes: transversality fails");
  out.gap = std::fabs(out.fd - out.vp) / scale;
  return out;
}

std::vector<ScannedEigenvalue> eigen_scan(const LinearizedSystem& sys,
                                          double lo, double hi, int grid,
                                          double rtol) {
  std::vector<double> xs(grid + 1);
  for (int i = 0; i <= grid; ++i) xs[i] = lo + (hi - lo) * i / grid;
  auto f = [&](double lam) { return evans(sys, lam, rtol).E; };
  std::vector<ScannedEigenvalue> out;
  for (auto [a, b] : sign_change_brackets(f, xs)) {
    const double lam = (a == b) ? a : brent_root(f, a, b, 1e-9);
    out.push_back({lam, std::fabs(f(lam))});
  }
  std::sort(out.begin(), out.end(),
            [](const ScannedEigenvalue& a, const ScannedEigenvalue& b) {
              return a.lambda < b.lambda;
            });
  return out;
}

double track_eigenvalue_near_zero(const LinearizedSystem& sys, double window,
                                  double rtol) {
  auto f = [&](double lam) { return evans(sys, lam, rtol).E; };
  // expand the bracket around zero until the sign flips
  double w = window;
  for (int k = 0; k < 40; ++k) {
    const double fa = f(-w), fb = f(w);
    if (fa * fb <= 0.0) return brent_root(f, -w, w, fa, fb, 1e-12);
    w *= 2.0;
  }
  throw NoRootFault("track_eigenvalue_near_zero: no bracketed root");
}

SlopeReport eigenvalue_slope(const StationaryMap& map, double beta_star,
                             double d2, double delta_beta) {
  SlopeReport rep;
  const Material& m = map.material();
  if (delta_beta <= 0.0) delta_beta = 1e-3 * std::max(1.0, beta_star);

  StationaryProfile pstar = map.reconstruct_profile(beta_star);
  LinearizedSystem sys_star = build_linearization(m, pstar);
  LambdaDerivative el = evans_lambda_derivative(sys_star);
  rep.e_lambda = el.vp;
  const double c2 = m.c2(m.theta0());
  rep.formula = 2.0 * beta_star / (pstar.p0 * c2 * el.vp) * d2;

  const double seed = std::max(4.0 * std::fabs(rep.formula) * delta_beta,
                               1e-6);
  rep.lambda_at_star = track_eigenvalue_near_zero(sys_star, seed);

  auto tracked_at = [&](double beta) {
    StationaryProfile p = map.reconstruct_profile(beta);
    LinearizedSystem sys = build_linearization(m, p);
    return track_eigenvalue_near_zero(sys, seed);
  };
  rep.lambda_minus = tracked_at(beta_star - delta_beta);
  rep.lambda_plus = tracked_at(beta_star + delta_beta);
  rep.tracked = (rep.lambda_plus - rep.lambda_minus) / (2.0 * delta_beta);
  rep.gap = std::fabs(rep.tracked - rep.formula) /
            std::max(std::fabs(rep.formula), 1e-300);
  return rep;
}

Eigenfunction eigenfunction(const LinearizedSystem& sys, double lambda,
                            const VectorXd& xs, double rtol) {
  // null combination of the boundary-adapted shooting solutions at x = 1/2
  State8 yf, yb;
  yf << 0, 1, 0, 0, 0, 0, 0, 1;
  yb << 0, 1, 0, 0, 0, 0, 0, 1;
  std::vector<State8> fs, bs;
  shoot_pair(sys, lambda, yf, {0.0, 0.5}, rtol, &fs);
  shoot_pair(sys, lambda, yb, {1.0, 0.5}, rtol, &bs);
  Eigen::Matrix4d m;
  m.col(0) = fs[0].segment<4>(0);
  m.col(1) = fs[0].segment<4>(4);
  m.col(2) = -bs[0].segment<4>(0);
  m.col(3) = -bs[0].segment<4>(4);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(m, Eigen::ComputeFullV);
  const Vector4d w = svd.matrixV().col(3);

  auto rhs = [&sys, lambda](double x, const Vector4d& y, Vector4d& dy) {
    dy = (sys.A(x) + lambda * sys.B(x)) * y;
  };

  Eigenfunction ef;
  ef.x = xs;
  ef.U.resize(xs.size());
  ef.Theta.resize(xs.size());
  // left side: w1 Z1 + w2 Z2 marched through the sample points
  Vector4d y = w[0] * Vector4d(0, 1, 0, 0) + w[1] * Vector4d(0, 0, 0, 1);
  double xcur = 0.0;
  for (Eigen::Index i = 0; i < xs.size() && xs[i] <= 0.5; ++i) {
    integrate_ode(rhs, xcur, xs[i], y, rtol, 1e-13);
    xcur = xs[i];
    ef.U[i] = y[0];
    ef.Theta[i] = y[2];
  }
  // right side: w3 Z3 + w4 Z4 marched backward
  y = w[2] * Vector4d(0, 1, 0, 0) + w[3] * Vector4d(0, 0, 0, 1);
  xcur = 1.0;
  for (Eigen::Index i = xs.size() - 1; i >= 0 && xs[i] > 0.5; --i) {
    integrate_ode(rhs, xcur, xs[i], y, rtol, 1e-13);
    xcur = xs[i];
    ef.U[i] = y[0];
    ef.Theta[i] = y[2];
  }
  // normalize to unit sup norm of (U, Theta)
  const double mag =
      std::max(ef.U.cwiseAbs().maxCoeff(), ef.Theta.cwiseAbs().maxCoeff());
  if (mag > 0.0) {
    ef.U /= mag;
    ef.Theta /= mag;
  }
  return ef;
}

}  // namespace elshear
