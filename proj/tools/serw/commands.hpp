#pragma once

#include <iosfwd>
#include <string>

#include "serw/config.hpp"

namespace serw::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitNumerical = 4,
};

struct CommandContext {
  std::ostream& out;  // summary (human text, or JSON with --json)
  std::ostream& err;  // progress and diagnostics
  bool json = false;
  int threads = 1;
};

// Each command writes its files into cfg.out_dir (created if needed, with
// effective_config.json) and returns an exit code. Files depend only on the
// configuration; thread count and timing never reach them.

/// tau.csv (n, survival, pmf) up to tau.n_max and tau_summary.json.
int cmd_tau(const RunConfig& cfg, const CommandContext& ctx);
/// nu.json: nu, both forms, E[tau], parity probabilities and bounds.
int cmd_nu(const RunConfig& cfg, const CommandContext& ctx);
/// msd.csv, tau_histogram.csv, msd_summary.json and, when requested,
/// trace.csv.
int cmd_msd(const RunConfig& cfg, const CommandContext& ctx);
/// sweep.csv and sweep_summary.json.
int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx);
/// fit.json and plot_<FAMILY>.csv per family; sweeps first (writing
/// sweep.csv) unless fit.input names an existing sweep CSV.
int cmd_fit(const RunConfig& cfg, const CommandContext& ctx);
/// rate.csv, gamma.csv, identity.csv and rate_check.json.
int cmd_rate_check(const RunConfig& cfg, const CommandContext& ctx);

}  // namespace serw::cli
