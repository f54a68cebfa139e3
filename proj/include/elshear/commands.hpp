#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "elshear/config.hpp"

namespace elshear {

/// Exit codes shared by all subcommands: 0 success, 1 check failure,
/// 2 usage / IO error.
struct CommandContext {
  RunConfig cfg;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 12345;
};

int cmd_validate(const CommandContext& ctx, std::ostream& out);
int cmd_bifurcation(const CommandContext& ctx, double ubar_max,
                    std::ostream& out);
int cmd_stationary(const CommandContext& ctx, double beta, double ubar,
                   std::ostream& out);
int cmd_evans(const CommandContext& ctx, double beta, double lambda_lo,
              double lambda_hi, int grid, bool write_scan, std::ostream& out);
int cmd_evolve(const CommandContext& ctx, double beta, double ubar, double T,
               std::ostream& out);
int cmd_report(const CommandContext& ctx, std::ostream& out);
int cmd_plot(const CommandContext& ctx, std::ostream& out);

}  // namespace elshear
