#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ringlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ringlab: viscous vortex ring simulation and estimate verification"};
  app.set_version_flag("--version", std::string(RINGLAB_VERSION));
  app.require_subcommand(1);

  std::string config, out = "runs", suite = "all", manifest;
  int jobs = 1;
  bool seedless = false;
  double s_lo = 1e-4, s_hi = 1e4;
  int count = 200;

  auto* simulate = app.add_subcommand("simulate", "run one configuration");
  simulate->add_option("--config", config, "run configuration file")->required();
  simulate->add_option("--out", out, "parent directory for run directories");
  simulate->add_flag("--seedless", seedless, "accepted for compatibility; runs are deterministic");

  auto* verify = app.add_subcommand("verify", "re-verify the snapshots of a run");
  verify->add_option("manifest", manifest, "manifest.json of a run")->required();
  verify->add_option("--suite", suite, "interpolation | velocity | decay | attainment | all")
      ->check(CLI::IsMember(ringlab::verify_suites()));

  auto* sweep = app.add_subcommand("sweep", "simulate and verify every point of a [sweep]");
  sweep->add_option("--config", config, "sweep configuration file")->required();
  sweep->add_option("--out", out, "parent directory for the sweep directory");
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--seedless", seedless, "accepted for compatibility; runs are deterministic");

  auto* table = app.add_subcommand("kernel-table", "tabulate F and F' on log-spaced points");
  table->add_option("--from", s_lo, "smallest s (> 0)");
  table->add_option("--to", s_hi, "largest s");
  table->add_option("--count", count, "number of points (>= 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ringlab::kExitUsage;
  }

  if (*simulate) return ringlab::cmd_simulate(config, out, std::cout);
  if (*verify) return ringlab::cmd_verify(manifest, suite, std::cout);
  if (*sweep) return ringlab::cmd_sweep(config, out, jobs, std::cout);
  if (*table) {
    const int code = ringlab::cmd_kernel_table(s_lo, s_hi, count, std::cout);
    if (code != ringlab::kExitOk)
      std::cerr << "kernel-table: need 0 < --from <= --to and --count >= 1\n";
    return code;
  }
  return ringlab::kExitUsage;
}
