#pragma once

#include <string>

#include <json.hpp>

#include "elshear/material.hpp"
#include "elshear/stationary.hpp"

namespace elshear {

/// Run configuration: material block plus solver tolerances and windows.
/// gamma1/gamma2 are always derived from the alphas, never read.
struct RunConfig {
  MaterialParams material;
  SolverOptions solver;
  int evolution_n = 513;
  double lambda_lo = -50.0;
  double lambda_hi = 10.0;
  int lambda_grid = 120;
  double beta_lo = 0.0;   // 0 means "auto from the pole layout"
  double beta_hi = 0.0;
  double ubar_max = 1.0;
  int branch_samples = 32;
  std::string out_dir = "out";

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    const auto& m = j.at("material");
    c.material.alpha1 = m.at("alpha1").get<double>();
    c.material.alpha2 = m.at("alpha2").get<double>();
    c.material.alpha3 = m.at("alpha3").get<double>();
    c.material.alpha4 = m.at("alpha4").get<double>();
    c.material.alpha5 = m.at("alpha5").get<double>();
    c.material.alpha6 = m.at("alpha6").get<double>();
    c.material.K1 = m.at("K1").get<double>();
    c.material.K3 = m.at("K3").get<double>();
    c.material.theta0 = m.at("theta0").get<double>();
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      c.solver.quad_tol = s.value("quad_tol", c.solver.quad_tol);
      c.solver.quad_tol_tight =
          s.value("quad_tol_tight", c.solver.quad_tol_tight);
      c.solver.pole_guard = s.value("pole_guard", c.solver.pole_guard);
      c.solver.ode_rtol = s.value("ode_rtol", c.solver.ode_rtol);
      c.solver.root_tol = s.value("root_tol", c.solver.root_tol);
      c.solver.profile_n = s.value("profile_n", c.solver.profile_n);
      c.evolution_n = s.value("evolution_n", c.evolution_n);
    }
    if (j.contains("windows")) {
      const auto& w = j["windows"];
      if (w.contains("lambda")) {
        c.lambda_lo = w["lambda"].at(0).get<double>();
        c.lambda_hi = w["lambda"].at(1).get<double>();
      }
      if (w.contains("beta")) {
        c.beta_lo = w["beta"].at(0).get<double>();
        c.beta_hi = w["beta"].at(1).get<double>();
      }
      c.ubar_max = w.value("ubar_max", c.ubar_max);
      c.lambda_grid = w.value("lambda_grid", c.lambda_grid);
      c.branch_samples = w.value("branch_samples", c.branch_samples);
    }
    if (j.contains("output")) {
      c.out_dir = j["output"].value("dir", c.out_dir);
    }
    c.check();
    return c;
  }

  void check() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw RangeFault(std::string(what) + " must be positive");
    };
    positive(solver.quad_tol, "quad_tol");
    positive(solver.quad_tol_tight, "quad_tol_tight");
    positive(solver.pole_guard, "pole_guard");
    positive(solver.ode_rtol, "ode_rtol");
    positive(solver.root_tol, "root_tol");
    if (solver.profile_n < 65 || solver.profile_n % 2 == 0)
      throw RangeFault("profile_n must be odd and >= 65");
    if (evolution_n < 65 || evolution_n % 2 == 0)
      throw RangeFault("evolution_n must be odd and >= 65");
    if (!(lambda_hi > lambda_lo)) throw RangeFault("lambda window disordered");
    if (beta_hi != 0.0 && !(beta_hi > beta_lo))
      throw RangeFault("beta window disordered");
    positive(ubar_max, "ubar_max");
  }
};

}  // namespace elshear
