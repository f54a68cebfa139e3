#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "elshear/material.hpp"

using namespace elshear;

namespace {

// Independent oracle: composite-Simpson quadrature of h/g on a fixed grid.
double simpson_G(const Material& m, double theta, long panels = 1000000) {
  const double a = m.theta0(), b = theta;
  const double hstep = (b - a) / (2.0 * panels);
  double sum = m.hg(a) + m.hg(b);
  for (long k = 1; k < 2 * panels; ++k)
    sum += m.hg(a + k * hstep) * ((k % 2) ? 4.0 : 2.0);
  return sum * hstep / 3.0;
}

MaterialParams equal_signs_params() {
  // gamma1 = gamma2 = 1 requires alpha2 = 0 under the gamma relations
  MaterialParams p;
  p.alpha2 = 0.0;
  p.alpha3 = 1.0;
  p.alpha5 = -0.5;
  p.alpha6 = 0.5;
  return p;
}

MaterialParams dominant_params() {
  // gamma1 = 1, gamma2 = -1/2
  MaterialParams p;
  p.alpha2 = -0.75;
  p.alpha3 = 0.25;
  p.alpha5 = 0.25;
  p.alpha6 = -0.25;
  return p;
}

}  // namespace

TEST_CASE("P0 coefficients at the reference angles") {
  Material m(MaterialParams::p0());
  CHECK(m.gamma1() == doctest::Approx(1.0));
  CHECK(m.gamma2() == doctest::Approx(-1.0));
  CHECK(m.g(0.0) == doctest::Approx(0.75));
  CHECK(m.h(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(m.c(0.0) == doctest::Approx(1.0));
  CHECK(m.g(kPi / 2) == doctest::Approx(1.75));
  CHECK(m.h(kPi / 2) == doctest::Approx(1.0));
  CHECK(m.c(kPi / 2) == doctest::Approx(1.0));

  Material ma(MaterialParams::p0_aniso());
  CHECK(ma.c(kPi / 2) == doctest::Approx(2.0));
  CHECK(ma.cp(kPi / 2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("validation of P0 and a broken variant") {
  Material m(MaterialParams::p0());
  const ValidationReport rep = m.validate();
  CHECK(rep.ok);
  // Cbar oracle: dense minimization of g - h^2/gamma1 over one period
  double cbar = 1e300;
  for (long i = 0; i <= 1000000; ++i)
    cbar = std::min(cbar, m.damping(kPi * i / 1000000));
  CHECK(rep.damping_floor == doctest::Approx(cbar).epsilon(1e-9));
  CHECK(rep.damping_floor == doctest::Approx(0.75).epsilon(1e-9));

  MaterialParams bad = MaterialParams::p0();
  bad.alpha4 = -1.0;
  const ValidationReport rb = Material(bad).validate();
  CHECK_FALSE(rb.ok);
  bool alpha4_failed = false;
  for (const auto& c : rb.checks)
    if (c.name == "alpha4 > 0") alpha4_failed = !c.pass;
  CHECK(alpha4_failed);
}

TEST_CASE("theta0 on an equilibrium is rejected") {
  MaterialParams p = MaterialParams::p0();
  p.theta0 = kPi;  // e_1 exactly
  const ValidationReport rep = Material(p).validate();
  bool dist_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "theta0 away from equilibria") dist_failed = !c.pass;
  CHECK(dist_failed);
}

TEST_CASE("coefficient derivatives match centered differences") {
  Material m(MaterialParams::p0_aniso());
  const double d = 1e-6;
  for (double th = -2.9; th < 1.3; th += 0.37) {
    auto fd = [&](auto&& f) { return (f(th + d) - f(th - d)) / (2 * d); };
    CHECK(m.gp(th) == doctest::Approx(fd([&](double t) { return m.g(t); }))
                          .epsilon(1e-6));
    CHECK(m.hp(th) == doctest::Approx(fd([&](double t) { return m.h(t); }))
                          .epsilon(1e-6));
    CHECK(m.cp(th) == doctest::Approx(fd([&](double t) { return m.c(t); }))
                          .epsilon(1e-6));
    CHECK(m.cpp(th) == doctest::Approx(fd([&](double t) { return m.cp(t); }))
                           .epsilon(1e-6));
    CHECK(m.hgp(th) == doctest::Approx(fd([&](double t) { return m.hg(t); }))
                           .epsilon(1e-6));
    if (std::fabs(m.h(th)) > 0.05) {
      CHECK(m.chp(th) ==
            doctest::Approx(fd([&](double t) { return m.c(t) / m.h(t); }))
                .epsilon(1e-6));
      CHECK(m.cghp(th) ==
            doctest::Approx(
                fd([&](double t) { return m.c(t) * m.g(t) / m.h(t); }))
                .epsilon(1e-6));
    }
  }
}

TEST_CASE("potential G: base point, sign, Simpson oracle, derivative") {
  Material m(MaterialParams::p0());
  CHECK(m.G(m.theta0()) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(m.G(0.0) < 0.0);  // oriented integral of a nonnegative integrand

  // high-resolution Simpson oracle at theta = pi/6
  const double oracle = simpson_G(m, kPi / 6);
  CHECK(std::fabs(m.G(kPi / 6) - oracle) < 1e-10);
  const double oracle2 = simpson_G(m, -2.0);
  CHECK(std::fabs(m.G(-2.0) - oracle2) < 1e-10);

  // G' = h/g against finite differences of the cached G
  for (double th = -2.7; th < 1.2; th += 0.41) {
    const double d = 1e-5;
    const double fd = (m.G(th + d) - m.G(th - d)) / (2 * d);
    CHECK(fd == doctest::Approx(m.hg(th)).epsilon(1e-6));
  }

  // G non-decreasing on a grid
  double prev = m.G(-3.0);
  for (double th = -3.0 + 0.01; th < 1.2; th += 0.01) {
    const double cur = m.G(th);
    CHECK(cur >= prev - 1e-13);
    prev = cur;
  }
}

TEST_CASE("F inverts G") {
  Material m(MaterialParams::p0());
  CHECK(m.F(0.0) == doctest::Approx(m.theta0()).epsilon(1e-10));
  for (double th = -2.9; th < 1.2; th += 0.23) {
    const double s = m.G(th);
    CHECK(m.F(s) == doctest::Approx(th).epsilon(1e-8));
    CHECK(m.G(m.F(s)) == doctest::Approx(s).epsilon(1e-10));
  }
  // s just above the image of a pole: F lands near the cusp, h small
  const double beta1 = -m.G(0.0);
  const double th = m.F(-beta1 * (1.0 - 1e-10));
  CHECK(std::fabs(th) < 1e-2);
  CHECK(std::fabs(m.h(th)) < 1e-4);
  CHECK_THROWS_AS(m.F(m.G(m.cache_lo()) - 1.0), RangeFault);
}

TEST_CASE("equilibria per regime") {
  SUBCASE("gamma1 = -gamma2: multiples of pi") {
    Material m(MaterialParams::p0());
    const auto e = m.equilibrium_angles(-kPi, 4 * kPi);
    REQUIRE(e.size() == 6);
    for (size_t k = 0; k < e.size(); ++k)
      CHECK(e[k] == doctest::Approx((static_cast<double>(k) - 1) * kPi));
    const auto set = m.equilibria(m.cache_lo(), m.theta0());
    REQUIRE(set.poles.size() >= 3);
    CHECK(set.pole_angles[0] == doctest::Approx(0.0));
    CHECK(set.pole_angles[1] == doctest::Approx(-kPi));
    for (size_t k = 0; k + 1 < set.poles.size(); ++k)
      CHECK(set.poles[k] < set.poles[k + 1]);
    for (double e_n : set.pole_angles)
      CHECK(m.h(e_n) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("gamma1 = gamma2: odd multiples of pi/2") {
    Material m(equal_signs_params());
    CHECK(m.regime() == Regime::kEqualSigns);
    const auto e = m.equilibrium_angles(0.0, 2 * kPi);
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(kPi / 2));
    CHECK(e[1] == doctest::Approx(3 * kPi / 2));
    for (double en : e) CHECK(m.h(en) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("gamma1 > |gamma2|: empty") {
    Material m(dominant_params());
    CHECK(m.regime() == Regime::kDominant);
    CHECK(m.equilibrium_angles(-10.0, 10.0).empty());
    CHECK(m.validate().ok);
    // h stays positive
    for (double th = -3.0; th < 3.0; th += 0.05) CHECK(m.h(th) > 0.0);
  }
}

TEST_CASE("damping bound holds pointwise") {
  for (const auto& params :
       {MaterialParams::p0(), MaterialParams::p0_aniso(),
        equal_signs_params(), dominant_params()}) {
    Material m(params);
    const double cbar = m.validate().damping_floor;
    CHECK(cbar > 0.0);
    for (double th = 0.0; th < kPi; th += 0.003) {
      CHECK(m.g(th) >= m.damping(th) - 1e-12);
      CHECK(m.damping(th) >= cbar - 1e-9);
    }
  }
}

TEST_CASE("h >= 0 with zeros exactly at the equilibria when gamma1=|gamma2|") {
  for (const auto& params :
       {MaterialParams::p0(), equal_signs_params()}) {
    Material m(params);
    for (double th = -7.0; th < 7.0; th += 0.0037) {
      CHECK(m.h(th) >= -1e-14);
    }
    for (double e : m.equilibrium_angles(-7.0, 7.0)) {
      CHECK(std::fabs(m.h(e)) < 1e-13);
      CHECK(std::fabs(m.hp(e)) < 1e-12);  // cusp: double zero
    }
  }
}
