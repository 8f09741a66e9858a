#pragma once

// Subcommands behind the ringlab executable. Each returns a process exit
// code: 0 ok, 1 verification failure or aborted run, 2 IO or configuration
// error.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ringlab/config.hpp"
#include "ringlab/estimates.hpp"

namespace ringlab {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct SimulateOutcome {
  int exit_code = kExitOk;
  std::filesystem::path run_dir;
  std::filesystem::path manifest;
};

/// Runs one configuration into a fresh directory under `out_dir` holding
/// config.ini, snapshots/eta_NNNNN.bin, diagnostics.csv, reports.jsonl and
/// manifest.json.
SimulateOutcome simulate_config(const RunConfig& config, const std::filesystem::path& out_dir,
                                std::ostream& log);
int cmd_simulate(const std::string& config_path, const std::filesystem::path& out_dir,
                 std::ostream& log);

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s = {"interpolation", "velocity", "decay", "attainment", "all"};
  return s;
}

struct VerifyOutcome {
  std::vector<EstimateReport> reports;
  std::vector<AttainmentRow> attainment;
  double nash_envelope = 0.0;  ///< max over t in [0.01, 0.5] of t^{3/2} ||eta||_inf
  bool pass = true;
};

/// Re-reads every snapshot of a manifest and evaluates `suite`. Throws
/// IoError naming a missing or corrupt snapshot.
VerifyOutcome verify_manifest(const std::filesystem::path& manifest, const std::string& suite,
                              std::ostream& table);
int cmd_verify(const std::filesystem::path& manifest, const std::string& suite, std::ostream& out);

/// Runs simulate + verify per (kappa, eps, grid) point with `jobs` workers
/// and writes the aggregate tables into a sweep directory under `out_dir`.
int cmd_sweep(const std::string& config_path, const std::filesystem::path& out_dir, int jobs,
              std::ostream& out);

int cmd_kernel_table(double s_lo, double s_hi, int count, std::ostream& out);

}  // namespace ringlab
