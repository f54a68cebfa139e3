#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elshear/commands.hpp"

using namespace elshear;

int main(int argc, char** argv) {
  CLI::App app{"Shear-flow laboratory for the parabolic Ericksen-Leslie "
               "model: stationary classification, saddle-node structure, "
               "Evans-function spectra and energy decay"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 12345;
  app.add_option("--config", config_path, "JSON config path")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--jobs", jobs, "worker pool size for sweeps");
  app.add_option("--seed", seed, "RNG seed for perturbations");

  auto* validate = app.add_subcommand("validate", "check material parameters");
  auto* bifurcation =
      app.add_subcommand("bifurcation", "poles, minima and branch diagram");
  double ubar_max = 0.0;
  bifurcation->add_option("--ubar-max", ubar_max, "sweep limit");
  auto* stationary =
      app.add_subcommand("stationary", "reconstruct stationary profiles");
  double beta = 0.0, ubar = 0.0;
  stationary->add_option("--beta", beta, "Hamiltonian level");
  stationary->add_option("--ubar", ubar, "boundary shear speed");
  auto* evans = app.add_subcommand("evans", "Evans-function scan + roots");
  double sbeta = 0.0, llo = 0.0, lhi = 0.0;
  int grid = 0;
  evans->add_option("--beta", sbeta, "profile level")->required();
  evans->add_option("--lambda-lo", llo, "window start");
  evans->add_option("--lambda-hi", lhi, "window end");
  evans->add_option("--grid", grid, "scan points");
  auto* eigs = app.add_subcommand("eigs", "eigenvalue report only");
  double ebeta = 0.0;
  eigs->add_option("--beta", ebeta, "profile level")->required();
  auto* evolve = app.add_subcommand("evolve", "linearized energy-decay run");
  double vbeta = 0.0, vubar = 0.0, T = 10.0;
  evolve->add_option("--beta", vbeta, "profile level");
  evolve->add_option("--ubar", vubar, "boundary shear speed");
  evolve->add_option("--T", T, "final time");
  auto* report = app.add_subcommand("report", "one-shot verification suite");
  auto* plot = app.add_subcommand("plot", "emit the D(beta) SVG");

  CLI11_PARSE(app, argc, argv);

  CommandContext ctx;
  try {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "cannot open config " << config_path << "\n";
      return 2;
    }
    ctx.cfg = RunConfig::from_json(nlohmann::json::parse(is));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  ctx.out_dir = out_dir.empty() ? ctx.cfg.out_dir : out_dir;
  ctx.jobs = jobs;
  ctx.seed = seed;

  try {
    if (*validate) return cmd_validate(ctx, std::cout);
    if (*bifurcation)
      return cmd_bifurcation(
          ctx, ubar_max > 0.0 ? ubar_max : ctx.cfg.ubar_max, std::cout);
    if (*stationary) return cmd_stationary(ctx, beta, ubar, std::cout);
    if (*evans) {
      const double lo = (llo == 0.0 && lhi == 0.0) ? ctx.cfg.lambda_lo : llo;
      const double hi = (llo == 0.0 && lhi == 0.0) ? ctx.cfg.lambda_hi : lhi;
      return cmd_evans(ctx, sbeta, lo, hi,
                       grid > 0 ? grid : ctx.cfg.lambda_grid, true,
                       std::cout);
    }
    if (*eigs)
      return cmd_evans(ctx, ebeta, ctx.cfg.lambda_lo, ctx.cfg.lambda_hi,
                       ctx.cfg.lambda_grid, false, std::cout);
    if (*evolve) return cmd_evolve(ctx, vbeta, vubar, T, std::cout);
    if (*report) return cmd_report(ctx, std::cout);
    if (*plot) return cmd_plot(ctx, std::cout);
  } catch (const Fault& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
