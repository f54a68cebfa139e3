#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "elshear/quadrature.hpp"
#include "elshear/stationary.hpp"

using namespace elshear;

namespace {

struct Fixture {
  Material mat{MaterialParams::p0()};
  StationaryMap map{mat};
  double beta1, beta2;
  Fixture() {
    const auto eq = mat.equilibria(mat.cache_lo(), mat.theta0());
    beta1 = eq.poles[0];
    beta2 = eq.poles[1];
  }
};

// second-order residual of the stationary system on the profile grid
std::pair<double, double> discrete_residual(const Material& m,
                                            const StationaryProfile& p) {
  const int n = static_cast<int>(p.x.size());
  const double dx = 1.0 / (n - 1);
  double r1 = 0.0, r2 = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double gp = m.g(0.5 * (p.theta[i] + p.theta[i + 1]));
    const double gm = m.g(0.5 * (p.theta[i] + p.theta[i - 1]));
    const double cp = m.c(0.5 * (p.theta[i] + p.theta[i + 1]));
    const double cm = m.c(0.5 * (p.theta[i] + p.theta[i - 1]));
    const double flux_u = (gp * (p.u[i + 1] - p.u[i]) -
                           gm * (p.u[i] - p.u[i - 1])) / (dx * dx);
    const double flux_t = m.c(p.theta[i]) *
                          (cp * (p.theta[i + 1] - p.theta[i]) -
                           cm * (p.theta[i] - p.theta[i - 1])) / (dx * dx);
    const double ux = (p.u[i + 1] - p.u[i - 1]) / (2.0 * dx);
    r1 = std::max(r1, std::fabs(flux_u));
    r2 = std::max(r2, std::fabs(flux_t - m.h(p.theta[i]) * ux));
  }
  return {r1, r2};
}

}  // namespace

TEST_CASE("D vanishes at 0+ and diverges monotonically at beta_1") {
  Fixture f;
  CHECK(f.map.D(1e-4) < f.map.D(1e-3));
  CHECK(f.map.D(1e-3) < 0.1);
  double prev = 0.0;
  for (int k = 4; k <= 12; ++k) {
    const double cur = f.map.D(f.beta1 * (1.0 - std::ldexp(1.0, -k)));
    CHECK(cur > prev);
    prev = cur;
  }
  // monotone divergence along beta_1 (1 - 10^-k)
  prev = 0.0;
  for (int k = 2; k <= 6; ++k) {
    const double cur = f.map.D(f.beta1 * (1.0 - std::pow(10.0, -k)));
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("pole guard and range faults") {
  Fixture f;
  CHECK_THROWS_AS(f.map.D(f.beta1), PoleFault);
  CHECK_THROWS_AS(f.map.D(f.beta1 * (1.0 + 1e-12)), PoleFault);
  CHECK_THROWS_AS(f.map.D(-1.0), RangeFault);
  CHECK_THROWS_AS(f.map.solve_ubar(1.0, f.beta1, f.beta2), PoleFault);
}

TEST_CASE("analytic D' against centered differences of D") {
  Fixture f;
  for (double b : {0.5 * f.beta1,
                   f.beta1 + 0.3 * (f.beta2 - f.beta1),
                   f.beta1 + 0.7 * (f.beta2 - f.beta1)}) {
    const double d = 1e-5 * std::max(1.0, b);
    const double fd =
        (f.map.D(b + d, 1e-13) - f.map.D(b - d, 1e-13)) / (2.0 * d);
    CHECK(f.map.D_prime(b, 1e-13) == doctest::Approx(fd).epsilon(1e-5));
  }
  // D' > 0 approaching the pole from below (D diverges there)
  CHECK(f.map.D_prime(f.beta1 * (1.0 - 1e-4)) > 0.0);
}

TEST_CASE("shooting oracle matches 2D on both intervals") {
  Fixture f;
  for (double b : {0.5 * f.beta1, 0.8 * f.beta1,
                   f.beta1 + 0.45 * (f.beta2 - f.beta1)}) {
    const double u_quad = 2.0 * f.map.D(b, 1e-12);
    const double u_shoot = f.map.ubar_by_shooting(b);
    CHECK(std::fabs(u_quad - u_shoot) / u_shoot < 1e-6);
  }
}

TEST_CASE("tau-substituted quadrature equals the theta form on (0, beta_1)") {
  Fixture f;
  for (double frac : {0.2, 0.4, 0.6, 0.8, 0.95}) {
    const double b = frac * f.beta1;
    const double d_theta = f.map.D(b, 1e-12);
    const double d_tau = f.map.D_tau_form(b, 1e-12);
    CHECK(std::fabs(d_theta - d_tau) / d_theta < 1e-8);
  }
  CHECK_THROWS_AS(
      f.map.D_tau_form(f.beta1 + 0.4 * (f.beta2 - f.beta1), 1e-10),
      RangeFault);
}

TEST_CASE("solve_ubar root structure") {
  Fixture f;
  const double guard_hi = f.beta1 * (1.0 - 1e-6);
  SUBCASE("small ubar: unique root on the first interval") {
    const auto roots = f.map.solve_ubar(0.05, 1e-7, guard_hi);
    REQUIRE(roots.size() == 1);
    CHECK(std::fabs(2.0 * f.map.D(roots[0]) - 0.05) < 1e-10);
  }
  SUBCASE("interval I_1: none below the fold, two above") {
    // locate the fold by a scan (independent of the bifurcation module)
    const double lo = f.beta1 * (1.0 + 1e-5);
    const double hi = f.beta2 * (1.0 - 1e-5);
    double dmin = 1e300;
    for (int i = 0; i <= 400; ++i)
      dmin = std::min(dmin, f.map.D(lo + (hi - lo) * i / 400.0));
    const double u1 = 2.0 * dmin;
    CHECK(f.map.solve_ubar(0.99 * u1, lo, hi).empty());
    const auto two = f.map.solve_ubar(1.01 * u1, lo, hi);
    REQUIRE(two.size() == 2);
    CHECK(two[0] < two[1]);
    for (double r : two)
      CHECK(std::fabs(2.0 * f.map.D(r) - 1.01 * u1) < 1e-10);
  }
}

TEST_CASE("profile reconstruction satisfies its invariants") {
  Fixture f;
  for (double b : {0.5 * f.beta1, f.beta1 + 0.55 * (f.beta2 - f.beta1)}) {
    CAPTURE(b);
    const StationaryProfile p = f.map.reconstruct_profile(b);
    const int n = static_cast<int>(p.x.size());
    const int mid = (n - 1) / 2;
    CHECK(n == 1025);
    CHECK(std::fabs(p.u[0]) < 1e-10);
    CHECK(std::fabs(p.u[n - 1] - p.ubar) < 1e-10);
    CHECK(std::fabs(p.theta[0] - f.mat.theta0()) < 1e-10);
    CHECK(std::fabs(p.theta[n - 1] - f.mat.theta0()) < 1e-10);
    CHECK(p.eta[mid] == 0.0);
    CHECK(p.theta[mid] == doctest::Approx(p.theta_tilde).epsilon(1e-12));
    CHECK(std::fabs(p.ubar - 2.0 * f.map.D(b, 1e-12)) < 1e-8);
    // symmetry
    for (int i = 0; i < n; ++i) {
      CHECK(p.theta[i] == doctest::Approx(p.theta[n - 1 - i]).epsilon(1e-10));
      CHECK(p.eta[i] == doctest::Approx(-p.eta[n - 1 - i]).epsilon(1e-10));
    }
    // pointwise Hamiltonian level eta^2/(2c^2) - p0 G = p0 beta
    for (int i = 0; i < n; i += 7) {
      const double lhs =
          p.eta[i] * p.eta[i] / (2.0 * f.mat.c2(p.theta[i])) -
          p.p0 * f.mat.G(p.theta[i]);
      CHECK(lhs == doctest::Approx(p.p0 * p.beta)
                       .epsilon(1e-9 * std::max(1.0, p.p0 * p.beta)));
    }
  }
}

TEST_CASE("discrete residual contracts ~4x under grid doubling") {
  Fixture f;
  const double b = 0.6 * f.beta1;
  const StationaryProfile coarse = f.map.reconstruct_profile(b, 513);
  const StationaryProfile fine = f.map.reconstruct_profile(b, 1025);
  const auto [r1c, r2c] = discrete_residual(f.mat, coarse);
  const auto [r1f, r2f] = discrete_residual(f.mat, fine);
  CHECK(r2c / r2f == doctest::Approx(4.0).epsilon(0.15));
  CHECK(r1c / r1f == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("conserved quantities: exact orbit vs corrupted orbit") {
  Fixture f;
  const double b = 0.5 * f.beta1;
  StationaryProfile p = f.map.reconstruct_profile(b);
  const ConservedDrift d = f.map.conserved_drift(p);
  CHECK(d.dH1 < 1e-7);
  CHECK(d.dH2 < 1e-7);
  CHECK(d.dH3 < 1e-7);

  // H2 at x = 0 equals p0 beta = -p0 G(theta~)
  const double H2_0 = p.eta[0] * p.eta[0] / (2.0 * f.mat.c2(p.theta[0])) -
                      p.p0 * f.mat.G(p.theta[0]);
  CHECK(H2_0 == doctest::Approx(p.p0 * p.beta).epsilon(1e-10));
  CHECK(H2_0 ==
        doctest::Approx(-p.p0 * f.mat.G(p.theta_tilde)).epsilon(1e-8));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 1; i + 1 < p.x.size(); ++i)
    p.theta[i] += 1e-3 * gauss(rng);
  const ConservedDrift dc = f.map.conserved_drift(p);
  CHECK(dc.dH2 > 1e-5);
}

TEST_CASE("one-to-one correspondence round trip") {
  Fixture f;
  for (double ub : {0.05, 1.0, 3.0}) {
    const auto roots = f.map.solve_ubar(ub, 1e-7, f.beta1 * (1 - 1e-6));
    for (double b : roots) {
      const StationaryProfile p = f.map.reconstruct_profile(b);
      CHECK(std::fabs(p.u[p.x.size() - 1] - ub) < 1e-8);
    }
  }
}

TEST_CASE("doubling ubar keeps the first-interval root unique") {
  Fixture f;
  const double hi = f.beta1 * (1.0 - 1e-6);
  const auto r1 = f.map.solve_ubar(0.4, 1e-7, hi);
  const auto r2 = f.map.solve_ubar(0.8, 1e-7, hi);
  CHECK(r1.size() == 1);
  CHECK(r2.size() == 1);
  CHECK(r2[0] > r1[0]);  // D is increasing along the first branch
}
