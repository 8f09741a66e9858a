#pragma once

// Forward-Euler integration of
//   eta_t + u . grad eta = eta_rr + (3/r) eta_r + eta_zz
// with first-order upwind finite-volume advection (face fluxes from the
// stream function, exactly divergence free) and the 5D radial Laplacian.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ringlab/biot_savart.hpp"
#include "ringlab/elliptic.hpp"
#include "ringlab/fields.hpp"

namespace ringlab {

enum class Integrator { kEuler, kSspRk2 };

struct SimConfig {
  GridSpec grid;
  std::vector<RingSpec> rings;
  double t_end = 0.5;
  double cfl_advect = 0.5;
  double cfl_diffuse = 0.9;
  int velocity_refresh = 1;
  int boundary_refresh = 10;  ///< in velocity refreshes
  BoundaryMode boundary = BoundaryMode::kFast;
  Integrator integrator = Integrator::kEuler;
  bool drift_free = false;  ///< freeze u = 0
  bool elliptic_correction = false;  ///< fourth-order stream solve at each refresh
  std::vector<double> snapshot_times;
  bool keep_snapshots = true;  ///< false: snapshots only reach the callback
  /// Optional replacement for the ring initial data (same grid).
  std::optional<ScalarFieldRZ> initial_eta;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Volumetric fluxes 2 pi \int u . n r dl through the cell faces of every
/// node: qr(i, j) through r = r_{i+1/2}, qz(i, j) through z = z_{j+1/2}.
struct FaceFluxes {
  ScalarFieldRZ qr;
  ScalarFieldRZ qz;
};

FaceFluxes face_fluxes(const ScalarFieldRZ& psi);
void face_fluxes_into(const ScalarFieldRZ& psi, FaceFluxes& q);

/// Volume 2 pi \int r dr dz of the control cell of node (i, j).
double cell_volume(const GridSpec& grid, int i);

struct SimState {
  double t = 0.0;
  long long steps = 0;
  ScalarFieldRZ eta;
  VelocityFieldRZ u;
  FaceFluxes fluxes;
  ScalarFieldRZ psi;
  ScalarFieldRZ omega;  ///< r eta at the last velocity refresh
  double dt_positivity = 0.0;  ///< positivity_dt for the current fluxes
  ScalarFieldRZ scratch;  ///< work buffer for advance
};

/// Builds the t = 0 state with velocity synchronised to eta.
SimState initial_state(const SimConfig& config);

/// Recomputes psi, u, the face fluxes and dt_positivity from eta. When
/// `boundary` is false the previous edge values of psi are reused.
void refresh_velocity(SimState& state, StreamSolver& solver, BoundaryMode mode, bool boundary);

/// Largest admissible step: min(cfl_advect h / max(|u|, 1e-12),
/// cfl_diffuse min(dr^2, dz^2) / 4, positivity bound of the update).
double cfl_dt(const SimState& state, const SimConfig& config);

/// Largest dt keeping every update coefficient nonnegative.
double positivity_dt(const SimState& state);

/// One update with the state's current fluxes. Throws StateError if dt
/// exceeds the positivity bound.
SimState step(const SimState& state, double dt, Integrator integrator = Integrator::kEuler);

/// In-place form of step, checked against the cached state.dt_positivity.
void advance(SimState& state, double dt, Integrator integrator = Integrator::kEuler);

struct Snapshot {
  double t = 0.0;
  long long steps = 0;
  ScalarFieldRZ eta;
  VelocityFieldRZ u;
};

struct RunAudit {
  double min_eta = 0.0;            ///< over every node and step
  double max_l1_increase = 0.0;    ///< largest step-to-step increase of ||eta||_1
  double l1_initial = 0.0;
  double momentum_initial = 0.0;
  double max_momentum_drift = 0.0; ///< relative, over every step
  long long steps = 0;
  double wall_seconds = 0.0;
};

struct RunResult {
  std::vector<Snapshot> snapshots;  ///< t = 0 first, then snapshot_times
  RunAudit audit;
  std::string error;  ///< empty unless the run aborted
};

/// Integrates to t_end. `on_snapshot` (optional) sees each snapshot as taken.
RunResult run(const SimConfig& config,
              const std::function<void(const Snapshot&)>& on_snapshot = {});

}  // namespace ringlab
