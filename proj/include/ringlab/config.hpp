#pragma once

// Run configuration files: `key = value` lines inside `[section]` headers,
// `#` comments. A `[ring]` header starts a new ring.
//
//   [grid]       nr, nz, r_max, z_min, z_max
//   [ring]       kappa, r0, z0, eps
//   [run]        t_end, cfl_advect, cfl_diffuse, velocity_refresh,
//                boundary_refresh, boundary (fast|exact),
//                integrator (euler|ssp-rk2), drift_free, elliptic_correction
//   [snapshots]  times (list), every, log (t_a, t_b, count)
//   [verify]     calibration, momentum_tolerance, far_field_radii,
//                decay_early, decay_late (t_a, t_b), test_center, test_radius
//   [sweep]      kappa, eps (lists), grid (list of NRxNZ),
//                grid_policy (all|coarsest-valid)

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ringlab/evolve.hpp"

namespace ringlab {

struct VerifyOptions {
  std::string calibration;  ///< empty: built-in constants
  double momentum_tolerance = 0.01;
  std::vector<double> far_field_radii = {20.0, 40.0};
  std::pair<double, double> decay_early = {0.01, 0.05};
  std::pair<double, double> decay_late = {0.1, 0.5};
  std::pair<double, double> test_center = {1.1, 0.25};
  double test_radius = 1.0;
};

enum class GridPolicy { kAll, kCoarsestValid };

struct SweepOptions {
  std::vector<double> kappa;
  std::vector<double> eps;
  std::vector<std::pair<int, int>> grids;
  GridPolicy grid_policy = GridPolicy::kAll;
  bool empty() const { return kappa.empty() && eps.empty() && grids.empty(); }
};

/// Section -> ordered (key, value) pairs exactly as written.
using ConfigEcho = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

struct RunConfig {
  SimConfig sim;
  VerifyOptions verify;
  SweepOptions sweep;
  ConfigEcho echo;
  std::string text;  ///< canonical rendering of echo

  /// Stable digest of the canonical text.
  std::uint64_t hash() const;
};

/// Throws ConfigError naming the line and key on any problem, including
/// rings of mixed sign.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical text of an echo; parse_config(render_config(e)) reproduces it.
std::string render_config(const ConfigEcho& echo);

/// Snapshot times from [snapshots] merged, sorted and clipped to (0, t_end].
std::vector<double> merge_snapshot_times(const std::vector<double>& times, double every,
                                         double log_a, double log_b, int log_count, double t_end);

}  // namespace ringlab
