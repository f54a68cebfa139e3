#include "elshear/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>

#include "elshear/bifurcation.hpp"
#include "elshear/evolution.hpp"
#include "elshear/io.hpp"
#include "elshear/parallel.hpp"
#include "elshear/spectral.hpp"

namespace elshear {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Fault("cannot create output directory " + dir);
}

}  // namespace

int cmd_validate(const CommandContext& ctx, std::ostream& out) {
  const Material mat(ctx.cfg.material);
  const ValidationReport rep = mat.validate();
  for (const auto& c : rep.checks)
    out << (c.pass ? "PASS  " : "FAIL  ") << c.name
        << "  (margin = " << fmt17(c.margin) << ")\n";
  out << "damping floor Cbar = " << fmt17(rep.damping_floor) << "\n";
  out << "regime: " << to_string(mat.regime()) << "\n";
  out << (rep.ok ? "OK" : "INVALID") << "\n";
  return rep.ok ? 0 : 1;
}

int cmd_bifurcation(const CommandContext& ctx, double ubar_max,
                    std::ostream& out) {
  ensure_dir(ctx.out_dir);
  const Material mat(ctx.cfg.material);
  const StationaryMap map(mat, ctx.cfg.solver);
  const Bifurcation bif(map);
  const BifurcationDiagram diag =
      bif.branch_diagram(ubar_max, ctx.cfg.branch_samples);

  json j;
  j["poles"] = diag.poles;
  j["minima"] = json::array();
  for (const auto& m : diag.minima)
    j["minima"].push_back({{"n", m.n},
                           {"beta_star", m.beta_star},
                           {"ubar_n", m.ubar_n},
                           {"D2", m.d2}});
  json branches = json::array();
  for (int n = 0; n <= 2; ++n) {
    for (const std::string side : {"lower", "upper"}) {
      json pts = json::array();
      for (const auto& p : diag.points)
        if (p.interval == n && p.side == side)
          pts.push_back({p.ubar, p.beta});
      if (!pts.empty())
        branches.push_back({{"n", n}, {"side", side}, {"points", pts}});
    }
  }
  j["branches"] = branches;
  write_text(join(ctx.out_dir, "diagram.json"), j.dump(2) + "\n");

  CsvTable t;
  t.columns = {"ubar", "beta", "interval", "side", "sign_Dprime"};
  for (const auto& p : diag.points)
    t.rows.push_back({p.ubar, p.beta, static_cast<double>(p.interval),
                      p.side == "lower" ? 0.0 : 1.0,
                      static_cast<double>(p.sign_dprime)});
  write_csv(join(ctx.out_dir, "diagram.csv"), t);

  // D sweep for the plot and its CSV companion
  CsvTable sweep;
  sweep.columns = {"beta", "D", "Dprime"};
  std::vector<double> xs, ys;
  const std::vector<double> poles = diag.poles;
  const int per = 160;
  const int nseg = std::min<int>(3, static_cast<int>(poles.size()));
  for (int seg = 0; seg < nseg; ++seg) {
    const double lo = (seg == 0) ? 0.0 : poles[seg - 1];
    const double hi = poles[seg];
    for (int i = 1; i < per; ++i) {
      const double b = lo + (hi - lo) * i / per;
      try {
        const double d = map.D(b);
        if (d > 8.0 * ubar_max) continue;  // clip the asymptotes
        sweep.rows.push_back({b, d, map.D_prime(b)});
        xs.push_back(b);
        ys.push_back(d);
      } catch (const Fault&) {
        continue;
      }
    }
    xs.push_back(hi);
    ys.push_back(std::numeric_limits<double>::quiet_NaN());  // curve break
  }
  write_csv(join(ctx.out_dir, "d_sweep.csv"), sweep);
  write_svg_curve(join(ctx.out_dir, "D_curve.svg"), xs, ys, poles,
                  "D(beta) with poles beta_n");
  out << "wrote diagram.json, diagram.csv, d_sweep.csv, D_curve.svg ("
      << diag.points.size() << " branch points)\n";
  return 0;
}

int cmd_stationary(const CommandContext& ctx, double beta, double ubar,
                   std::ostream& out) {
  ensure_dir(ctx.out_dir);
  const Material mat(ctx.cfg.material);
  const StationaryMap map(mat, ctx.cfg.solver);
  std::vector<double> betas;
  if (beta > 0.0) {
    betas.push_back(beta);
  } else {
    if (!(ubar > 0.0)) {
      out << "stationary: need --beta or --ubar\n";
      return 2;
    }
    const Bifurcation bif(map);
    const int nseg =
        std::min<int>(3, static_cast<int>(bif.poles().size()));
    for (int n = 0; n < nseg; ++n) {
      auto [lo, hi] = bif.interval(n);
      for (double b : map.solve_ubar(ubar, lo, hi)) betas.push_back(b);
    }
    if (betas.empty()) {
      out << "stationary: no roots of 2D(beta) = ubar in the window\n";
      return 1;
    }
  }
  for (size_t k = 0; k < betas.size(); ++k) {
    const StationaryProfile p = map.reconstruct_profile(betas[k]);
    const std::string base =
        join(ctx.out_dir,
             betas.size() == 1 ? "profile" : "profile_" + std::to_string(k));
    write_profile(base, p);
    out << "beta = " << fmt17(p.beta) << "  ubar = " << fmt17(p.ubar)
        << "  p0 = " << fmt17(p.p0) << "  -> " << base << ".csv\n";
  }
  return 0;
}

int cmd_evans(const CommandContext& ctx, double beta, double lambda_lo,
              double lambda_hi, int grid, bool write_scan,
              std::ostream& out) {
  ensure_dir(ctx.out_dir);
  const Material mat(ctx.cfg.material);
  const StationaryMap map(mat, ctx.cfg.solver);
  const StationaryProfile prof = map.reconstruct_profile(beta);
  const LinearizedSystem sys = build_linearization(mat, prof);

  if (write_scan) {
    CsvTable t;
    t.columns = {"lambda", "E", "x_residual"};
    t.rows.resize(grid + 1);
    parallel_for(grid + 1, ctx.jobs, [&](int i) {
      const double lam = lambda_lo + (lambda_hi - lambda_lo) * i / grid;
      const EvansEvaluation ev = evans(sys, lam, ctx.cfg.solver.ode_rtol);
      t.rows[i] = {lam, ev.E, ev.x_residual};
    });
    write_csv(join(ctx.out_dir, "evans_scan.csv"), t);
  }

  std::vector<ScannedEigenvalue> eigs;
  if (lambda_hi > lambda_lo)
    eigs = eigen_scan(sys, lambda_lo, lambda_hi, grid,
                      ctx.cfg.solver.ode_rtol);
  const ZeroIdentity zi = evans_zero_identity(sys, map);
  json j;
  j["beta"] = beta;
  j["eigenvalues"] = json::array();
  for (const auto& e : eigs)
    j["eigenvalues"].push_back({{"lambda", e.lambda},
                                {"residual", e.residual}});
  j["E0"] = zi.E0;
  j["Dprime"] = map.D_prime(beta);
  j["identity_gap"] = zi.gap;
  write_text(join(ctx.out_dir, "eigenvalues.json"), j.dump(2) + "\n");
  out << "beta = " << fmt17(beta) << ": " << eigs.size()
      << " real eigenvalue(s) in window, identity gap = " << fmt17(zi.gap)
      << "\n";
  return 0;
}

int cmd_evolve(const CommandContext& ctx, double beta, double ubar, double T,
               std::ostream& out) {
  ensure_dir(ctx.out_dir);
  const Material mat(ctx.cfg.material);
  const StationaryMap map(mat, ctx.cfg.solver);
  double b = beta;
  if (!(b > 0.0)) {
    if (!(ubar > 0.0)) {
      out << "evolve: need --beta or --ubar\n";
      return 2;
    }
    const Bifurcation bif(map);
    auto [lo, hi] = bif.interval(0);
    const auto roots = map.solve_ubar(ubar, lo, hi);
    if (roots.empty()) {
      out << "evolve: no stationary solution at this ubar\n";
      return 1;
    }
    b = roots.front();
  }
  const StationaryProfile prof =
      map.reconstruct_profile(b, ctx.cfg.evolution_n);
  const DecayReport rep = decay_report(mat, prof, T, ctx.seed,
                                       ctx.cfg.evolution_n);

  CsvTable t;
  t.columns = {"t", "E_b"};
  for (const auto& [tt, e] : rep.trace) t.rows.push_back({tt, e});
  write_csv(join(ctx.out_dir, "energy_trace.csv"), t);

  // terminal linearized fields in the profile schema:
  // u = U, theta = Theta, eta = c^2(theta_bg) Theta_x
  LinearizedEvolution evo(mat, prof, ctx.cfg.evolution_n);
  evo.set_fields(sine_perturbation(evo.x(), 16, ctx.seed, 1e-2),
                 sine_perturbation(evo.x(), 16, ctx.seed + 1, 1e-2));
  evo.advance(T);
  CsvTable f;
  f.columns = {"x", "u", "theta", "eta"};
  const int n = evo.n();
  const double dx = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    double tx;
    if (i == 0)
      tx = (evo.Theta()[1] - evo.Theta()[0]) / dx;
    else if (i == n - 1)
      tx = (evo.Theta()[n - 1] - evo.Theta()[n - 2]) / dx;
    else
      tx = (evo.Theta()[i + 1] - evo.Theta()[i - 1]) / (2.0 * dx);
    f.rows.push_back({evo.x()[i], evo.U()[i], evo.Theta()[i],
                      mat.c2(evo.theta_bg()[i]) * tx});
  }
  write_csv(join(ctx.out_dir, "terminal_fields.csv"), f);

  json j;
  j["ubar"] = rep.ubar;
  j["beta"] = rep.beta;
  j["b"] = rep.b;
  j["eps"] = rep.eps;
  j["L_fit"] = rep.L_fit;
  j["r1"] = rep.r1;
  j["r2"] = rep.r2;
  j["r3"] = rep.r3;
  j["passed"] = rep.passed;
  j["seed"] = rep.seed;
  write_text(join(ctx.out_dir, "evolve_meta.json"), j.dump(2) + "\n");
  out << "beta = " << fmt17(rep.beta) << "  L_fit = " << fmt17(rep.L_fit)
      << "  passed = " << (rep.passed ? "true" : "false") << "\n";
  return 0;
}

int cmd_plot(const CommandContext& ctx, std::ostream& out) {
  // cmd_bifurcation already writes the plot; this recomputes just the curve
  CommandContext c2 = ctx;
  return cmd_bifurcation(c2, ctx.cfg.ubar_max, out);
}

namespace {

struct Check {
  std::string name;
  std::string status;  // PASS / FAIL / SKIP
  double gap = 0.0;
  double tol = 0.0;
  std::string note;
};

void add_check(std::vector<Check>& cs, std::ostream& out,
               const std::string& name, bool pass, double gap, double tol,
               const std::string& note = "") {
  cs.push_back({name, pass ? "PASS" : "FAIL", gap, tol, note});
  out << (pass ? "PASS  " : "FAIL  ") << name << "  (gap = " << fmt17(gap)
      << ", tol = " << fmt17(tol) << ")" << (note.empty() ? "" : "  " + note)
      << "\n";
}

void skip_check(std::vector<Check>& cs, std::ostream& out,
                const std::string& name, const std::string& reason) {
  cs.push_back({name, "SKIP", 0.0, 0.0, reason});
  out << "SKIP  " << name << "  (" << reason << ")\n";
}

}  // namespace

int cmd_report(const CommandContext& ctx, std::ostream& out) {
  ensure_dir(ctx.out_dir);
  const Material mat(ctx.cfg.material);
  const StationaryMap map(mat, ctx.cfg.solver);
  std::vector<Check> checks;

  const ValidationReport vr = mat.validate();
  add_check(checks, out, "material validation", vr.ok, 0.0, 0.0,
            "Cbar = " + fmt17(vr.damping_floor));

  const bool has_poles = mat.regime() == Regime::kOppositeSigns ||
                         mat.regime() == Regime::kEqualSigns;

  // identity suite E(0,beta) = -(2 beta / (p0 c^2)) D'(beta)
  {
    std::vector<double> betas;
    if (has_poles) {
      const Bifurcation bif(map);
      const auto poles = bif.poles();
      for (double f : {0.25, 0.5, 0.75}) betas.push_back(f * poles[0]);
      if (poles.size() > 1)
        for (double f : {0.3, 0.5, 0.8})
          betas.push_back(poles[0] + f * (poles[1] - poles[0]));
    } else {
      const double cap = std::min(5.0, -mat.G(mat.cache_lo()) * 0.8);
      for (double f : {0.2, 0.4, 0.6, 0.8}) betas.push_back(f * cap);
    }
    std::vector<double> gaps(betas.size());
    parallel_for(static_cast<int>(betas.size()), ctx.jobs, [&](int i) {
      const StationaryProfile p = map.reconstruct_profile(betas[i]);
      const LinearizedSystem sys = build_linearization(mat, p);
      gaps[i] = evans_zero_identity(sys, map).gap;
    });
    const double worst = *std::max_element(gaps.begin(), gaps.end());
    add_check(checks, out, "Evans zero identity (shooting vs quadrature)",
              worst < 1e-5, worst, 1e-5);
  }

  if (has_poles) {
    const Bifurcation bif(map);
    const auto mn = bif.find_minimum(1);
    if (!mn) {
      skip_check(checks, out, "fold checks", "no interior minimum on I_1");
    } else {
      // monodromy closed forms at beta*
      {
        const StationaryProfile p = map.reconstruct_profile(mn->beta_star);
        const LinearizedSystem sys = build_linearization(mat, p);
        const MonodromyResult mr = monodromy(sys, map);
        const double g1 = std::fabs(mr.Phi1(0, 1) - mr.T12_cf) /
                          std::max(1e-300, std::fabs(mr.T12_cf));
        const double g2 = std::fabs(mr.Phi1(2, 3) - mr.T34_cf) /
                          std::max(1e-300, std::fabs(mr.T34_cf));
        const double worst = std::max({g1, g2, mr.det_residual});
        add_check(checks, out, "monodromy closed forms + det Phi = 1",
                  worst < 1e-5, worst, 1e-5);
      }
      // zero-eigenvalue slope at the fold
      {
        const SlopeReport sr = eigenvalue_slope(map, mn->beta_star, mn->d2);
        add_check(checks, out, "lambda(beta*) = 0",
                  std::fabs(sr.lambda_at_star) < 1e-7,
                  std::fabs(sr.lambda_at_star), 1e-7);
        add_check(checks, out, "opposite eigenvalue signs across beta*",
                  sr.lambda_minus * sr.lambda_plus < 0.0, 0.0, 0.0);
        add_check(checks, out, "eigenvalue slope formula vs tracked",
                  sr.gap < 5e-3, sr.gap, 5e-3,
                  "E_lambda = " + fmt17(sr.e_lambda));
      }
      // saddle-node structure on I_1
      {
        auto [lo, hi] = bif.interval(1);
        const auto below = map.solve_ubar(0.99 * mn->ubar_n, lo, hi);
        const auto above = map.solve_ubar(1.01 * mn->ubar_n, lo, hi);
        const bool pass = below.empty() && above.size() == 2;
        add_check(checks, out, "saddle-node root counts (0 below, 2 above)",
                  pass, static_cast<double>(above.size()), 2.0);
      }
    }
  } else {
    skip_check(checks, out, "fold checks",
               "gamma1 > |gamma2|: no poles in working window");
  }

  // D oracle: quadrature vs nonlinear shooting
  {
    std::vector<double> betas;
    if (has_poles) {
      const auto poles = Bifurcation(map).poles();
      betas = {0.35 * poles[0], 0.7 * poles[0]};
      if (poles.size() > 1) betas.push_back(0.5 * (poles[0] + poles[1]));
    } else {
      const double cap = std::min(5.0, -mat.G(mat.cache_lo()) * 0.8);
      betas = {0.3 * cap, 0.6 * cap};
    }
    double worst = 0.0;
    for (double b : betas) {
      const double u1 = 2.0 * map.D(b, ctx.cfg.solver.quad_tol_tight);
      const double u2 = map.ubar_by_shooting(b);
      worst = std::max(worst, std::fabs(u1 - u2) / std::fabs(u2));
    }
    add_check(checks, out, "D quadrature vs shooting oracle", worst < 1e-6,
              worst, 1e-6);
  }

  // small-ubar decay and bounds
  {
    bool all_pass = true;
    double fit = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto roots = map.solve_ubar(0.05, 1e-6, has_poles
                                        ? 0.9 * Bifurcation(map).poles()[0]
                                        : 1.0);
      if (roots.empty()) {
        all_pass = false;
        break;
      }
      const StationaryProfile p =
          map.reconstruct_profile(roots.front(), ctx.cfg.evolution_n);
      const DecayReport rep =
          decay_report(mat, p, 5.0, ctx.seed + s, ctx.cfg.evolution_n);
      fit = rep.L_fit;
      all_pass = all_pass && rep.passed;
    }
    add_check(checks, out, "small-ubar energy decay", all_pass, fit, 0.0,
              "L_fit of last seed");
  }
  {
    std::vector<double> ratios;
    for (double ub : {0.1, 0.05, 0.025}) {
      const auto roots = map.solve_ubar(ub, 1e-6, has_poles
                                        ? 0.9 * Bifurcation(map).poles()[0]
                                        : 1.0);
      if (roots.empty()) continue;
      const StationaryProfile p = map.reconstruct_profile(roots.front());
      const SmallUbarBounds sb = small_ubar_bounds(mat, p);
      ratios.push_back(sb.ratio_ux);
      ratios.push_back(sb.ratio_thetax);
      ratios.push_back(sb.ratio_thetaxx);
    }
    const double worst =
        ratios.empty() ? 1e300 : *std::max_element(ratios.begin(),
                                                   ratios.end());
    add_check(checks, out, "small-ubar gradient bounds", worst < 10.0, worst,
              10.0, "max ratio across the sweep");
  }

  json j;
  j["checks"] = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"status", c.status},
                           {"gap", c.gap},
                           {"tol", c.tol},
                           {"note", c.note}});
    if (c.status == "FAIL") ok = false;
  }
  j["ok"] = ok;
  write_text(join(ctx.out_dir, "report.json"), j.dump(2) + "\n");
  out << (ok ? "REPORT OK" : "REPORT FAILED") << "\n";
  return ok ? 0 : 1;
}

}  // namespace elshear
