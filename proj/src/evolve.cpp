#include "ringlab/evolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ringlab/error.hpp"

namespace ringlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUFloor = 1e-12;

// Total outgoing volumetric flux of the control cell of node (i, j).
double outflow(const FaceFluxes& q, int i, int j) {
  double out = std::max(q.qr(i, j), 0.0) + std::max(q.qz(i, j), 0.0) - std::min(q.qz(i, j - 1), 0.0);
  if (i > 0) out -= std::min(q.qr(i - 1, j), 0.0);
  return out;
}

// Radial diffusion centre weight (times dr^2), explicit rows only.
double radial_centre(int i) { return i == 1 ? 2.5 : 2.0; }

void euler_into(const ScalarFieldRZ& eta, const FaceFluxes& q, double dt, ScalarFieldRZ& out) {
  const auto& g = eta.grid();
  const int nr = g.nr, nz = g.nz;
  const std::size_t stride = static_cast<std::size_t>(nz) + 1;
  const double idr2 = 1.0 / (g.dr() * g.dr()), idz2 = 1.0 / (g.dz() * g.dz());
  const double axis_gain = 8.0 * dt * idr2;
  const double* ev = eta.values().data();
  const double* qrv = q.qr.values().data();
  const double* qzv = q.qz.values().data();
  double* ov = out.values().data();
  std::vector<double> west(stride, 0.0);
  for (int i = 0; i < nr; ++i) {
    const double inv_vol = 1.0 / cell_volume(g, i);
    const double up = i >= 2 ? 1.0 + 1.5 / i : (i == 1 ? 2.5 : 0.0);
    const double down = i >= 2 ? 1.0 - 1.5 / i : 0.0;
    const double centre = i == 0 ? 0.0 : radial_centre(i);
    const std::size_t row = static_cast<std::size_t>(i) * stride;
    const double* e = ev + row;
    const double* en = e + stride;
    // Row i - 1 (or zeros on the axis, where no west face exists).
    const double* es = i > 0 ? e - stride : west.data();
    const double* qw = i > 0 ? qrv + row - stride : west.data();
    const double* qe = qrv + row;
    const double* qz = qzv + row;
    double* o = ov + row;
    for (int j = 1; j < nz; ++j) {
      // Advection: net inflow of upwinded eta.
      const double flux = -(std::max(qe[j], 0.0) * e[j] + std::min(qe[j], 0.0) * en[j]) +
                          (std::max(qw[j], 0.0) * es[j] + std::min(qw[j], 0.0) * e[j]) -
                          (std::max(qz[j], 0.0) * e[j] + std::min(qz[j], 0.0) * e[j + 1]) +
                          (std::max(qz[j - 1], 0.0) * e[j - 1] + std::min(qz[j - 1], 0.0) * e[j]);
      const double zdiff = (e[j + 1] - 2.0 * e[j] + e[j - 1]) * idz2;
      const double rdiff = (up * en[j] - centre * e[j] + down * es[j]) * idr2;
      o[j] = e[j] + dt * (flux * inv_vol + rdiff + zdiff);
    }
    if (i == 0)
      for (int j = 1; j < nz; ++j) o[j] = (o[j] + axis_gain * en[j]) / (1.0 + axis_gain);
  }
  for (int j = 0; j <= nz; ++j) out(nr, j) = 0.0;
  for (int i = 0; i <= nr; ++i) {
    out(i, 0) = 0.0;
    out(i, nz) = 0.0;
  }
}

struct AuditSums {
  double l1 = 0.0;
  double momentum = 0.0;
  double min = 0.0;
  bool finite = true;
};

// One pass with the same summation order as norm_lp_3d and signed_momentum_z.
AuditSums audit_sums(const ScalarFieldRZ& eta, const std::vector<double>& w0,
                     const std::vector<double>& w2) {
  const auto& g = eta.grid();
  AuditSums s;
  s.min = eta(0, 0);
  for (int i = 0; i <= g.nr; ++i) {
    double row_abs = 0.0, row = 0.0, lo = s.min;
    const double* v = eta.values().data() + g.index(i, 0);
    for (int j = 0; j <= g.nz; ++j) {
      row_abs += std::abs(v[j]);
      row += v[j];
      lo = std::min(lo, v[j]);
    }
    s.l1 += row_abs * w0[static_cast<std::size_t>(i)];
    s.momentum += row * w2[static_cast<std::size_t>(i)];
    s.min = lo;
  }
  s.l1 *= g.dz();
  s.momentum *= g.dz();
  s.finite = std::isfinite(s.l1) && std::isfinite(s.momentum);
  return s;
}

}  // namespace

void SimConfig::validate() const {
  grid.validate();
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end must be a finite nonnegative time");
  if (!(cfl_advect > 0.0 && cfl_advect <= 1.0)) fail("cfl_advect must lie in (0, 1]");
  if (!(cfl_diffuse > 0.0 && cfl_diffuse <= 1.0)) fail("cfl_diffuse must lie in (0, 1]");
  if (velocity_refresh < 1) fail("velocity_refresh must be a positive integer");
  if (boundary_refresh < 1) fail("boundary_refresh must be a positive integer");
  for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
    const double t = snapshot_times[k];
    if (!(t > 0.0 && t <= t_end)) fail("snapshot times must lie in (0, t_end]");
    if (k > 0 && !(t > snapshot_times[k - 1])) fail("snapshot times must be strictly increasing");
  }
  if (initial_eta) {
    if (!(initial_eta->grid() == grid)) fail("initial_eta grid differs from the run grid");
  } else {
    if (rings.empty()) fail("at least one ring is required");
    make_mollified_ring(grid, rings);  // validates the rings against the grid
  }
}

double cell_volume(const GridSpec& g, int i) {
  if (i == 0) return kPi * g.dr() * g.dr() * g.dz() / 4.0;
  return 2.0 * kPi * g.r(i) * g.dr() * g.dz();
}

FaceFluxes face_fluxes(const ScalarFieldRZ& psi) {
  FaceFluxes q;
  face_fluxes_into(psi, q);
  return q;
}

void face_fluxes_into(const ScalarFieldRZ& psi, FaceFluxes& q) {
  const auto& g = psi.grid();
  if (!(q.qr.grid() == g)) q = FaceFluxes{ScalarFieldRZ(g), ScalarFieldRZ(g)};
  // Corner values psi(r_{i+1/2}, z_{j+1/2}) of rows i and i - 1.
  std::vector<double> c(static_cast<std::size_t>(g.nz)), c_prev(c.size(), 0.0);
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nz; ++j)
      c[static_cast<std::size_t>(j)] = 0.25 * (psi(i, j) + psi(i + 1, j) + psi(i, j + 1) + psi(i + 1, j + 1));
    for (int j = 1; j < g.nz; ++j)
      q.qr(i, j) = -2.0 * kPi * (c[static_cast<std::size_t>(j)] - c[static_cast<std::size_t>(j - 1)]);
    for (int j = 0; j < g.nz; ++j)
      q.qz(i, j) = 2.0 * kPi * (c[static_cast<std::size_t>(j)] - c_prev[static_cast<std::size_t>(j)]);
    std::swap(c, c_prev);
  }
}

SimState initial_state(const SimConfig& config) {
  config.validate();
  SimState s;
  s.eta = config.initial_eta ? *config.initial_eta : make_mollified_ring(config.grid, config.rings);
  s.u = VelocityFieldRZ(config.grid);
  s.fluxes = FaceFluxes{ScalarFieldRZ(config.grid), ScalarFieldRZ(config.grid)};
  s.psi = ScalarFieldRZ(config.grid);
  if (!config.drift_free) {
    EllipticOptions options;
    options.deferred_correction = config.elliptic_correction;
    StreamSolver solver(config.grid, options);
    refresh_velocity(s, solver, config.boundary, true);
  } else {
    s.dt_positivity = positivity_dt(s);
  }
  return s;
}

void refresh_velocity(SimState& state, StreamSolver& solver, BoundaryMode mode, bool boundary) {
  const auto& g = state.eta.grid();
  if (!(state.omega.grid() == g)) state.omega = ScalarFieldRZ(g);
  for (int i = 0; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) state.omega(i, j) = g.r(i) * state.eta(i, j);
  if (boundary) fill_boundary_stream(state.omega, state.psi, mode);
  solver.solve(state.omega, state.psi);
  velocity_from_stream_into(state.psi, state.u);
  face_fluxes_into(state.psi, state.fluxes);
  state.dt_positivity = positivity_dt(state);
}

double positivity_dt(const SimState& state) {
  const auto& g = state.eta.grid();
  const double idr2 = 1.0 / (g.dr() * g.dr()), idz2 = 1.0 / (g.dz() * g.dz());
  double rate = 0.0;
  for (int i = 0; i < g.nr; ++i) {
    const double inv_vol = 1.0 / cell_volume(g, i);
    const double diff = 2.0 * idz2 + (i == 0 ? 0.0 : radial_centre(i) * idr2);
    for (int j = 1; j < g.nz; ++j) rate = std::max(rate, diff + outflow(state.fluxes, i, j) * inv_vol);
  }
  return 1.0 / rate;
}

double cfl_dt(const SimState& state, const SimConfig& config) {
  const auto& g = state.eta.grid();
  if (!state.u.all_finite()) throw StateError("non-finite velocity in cfl_dt");
  const double h = std::min(g.dr(), g.dz());
  const double umax = state.u.sup();
  const double advect = config.cfl_advect * h / std::max(umax, kUFloor);
  const double diffuse = config.cfl_diffuse * h * h / 4.0;
  const double positive = state.dt_positivity > 0.0 ? state.dt_positivity : positivity_dt(state);
  return std::min({advect, diffuse, positive});
}

void advance(SimState& state, double dt, Integrator integrator) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw StateError("time step must be positive and finite");
  const double limit = state.dt_positivity > 0.0 ? state.dt_positivity : positivity_dt(state);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "step rejected: dt = " << dt << " exceeds the positivity bound " << limit;
    throw StateError(msg.str());
  }
  const auto& g = state.eta.grid();
  if (!(state.scratch.grid() == g)) state.scratch = ScalarFieldRZ(g);
  euler_into(state.eta, state.fluxes, dt, state.scratch);
  if (integrator == Integrator::kSspRk2) {
    ScalarFieldRZ second(g);
    euler_into(state.scratch, state.fluxes, dt, second);
    auto& v = state.scratch.values();
    const auto& a = state.eta.values();
    const auto& b = second.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.5 * (a[k] + b[k]);
  }
  std::swap(state.eta, state.scratch);
  state.t += dt;
  ++state.steps;
}

SimState step(const SimState& state, double dt, Integrator integrator) {
  SimState out = state;
  out.dt_positivity = positivity_dt(out);
  advance(out, dt, integrator);
  return out;
}

RunResult run(const SimConfig& config, const std::function<void(const Snapshot&)>& on_snapshot) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  SimState state = initial_state(config);
  std::optional<StreamSolver> solver;
  if (!config.drift_free) {
    EllipticOptions options;
    options.deferred_correction = config.elliptic_correction;
    solver.emplace(config.grid, options);
  }

  auto take = [&] {
    Snapshot s{state.t, state.steps, state.eta, state.u};
    if (on_snapshot) on_snapshot(s);
    if (config.keep_snapshots) result.snapshots.push_back(std::move(s));
  };

  auto& audit = result.audit;
  audit.l1_initial = norm_lp_3d(state.eta, 1.0);
  audit.momentum_initial = signed_momentum_z(state.eta);
  audit.min_eta = state.eta.min_value();
  take();

  std::vector<double> targets = config.snapshot_times;
  if (targets.empty() || targets.back() < config.t_end) targets.push_back(config.t_end);

  std::vector<double> w0, w2;
  for (int i = 0; i <= config.grid.nr; ++i) {
    w0.push_back(row_weight(config.grid, i, 0.0));
    w2.push_back(row_weight(config.grid, i, 2.0));
  }
  double l1_prev = audit.l1_initial;
  long long refreshes = 0;
  double dt_cfl = 0.0;
  bool need_refresh = false;
  try {
    dt_cfl = cfl_dt(state, config);
    std::size_t next = 0;
    while (config.t_end > 0.0 && next < targets.size()) {
      if (need_refresh && !config.drift_free) {
        ++refreshes;
        refresh_velocity(state, *solver, config.boundary, refreshes % config.boundary_refresh == 0);
        dt_cfl = cfl_dt(state, config);
        need_refresh = false;
      }
      const double target = targets[next];
      double dt = dt_cfl;
      bool hit = false;
      if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
        dt = target - state.t;
        hit = true;
      }
      if (dt > 0.0) advance(state, dt, config.integrator);
      if (hit) state.t = target;
      const auto sums = audit_sums(state.eta, w0, w2);
      if (!sums.finite) throw StateError("non-finite eta after step");
      audit.min_eta = std::min(audit.min_eta, sums.min);
      audit.max_l1_increase = std::max(audit.max_l1_increase, sums.l1 - l1_prev);
      l1_prev = sums.l1;
      if (audit.momentum_initial != 0.0) {
        const double drift = std::abs(sums.momentum / audit.momentum_initial - 1.0);
        audit.max_momentum_drift = std::max(audit.max_momentum_drift, drift);
      }
      if (state.steps % config.velocity_refresh == 0) need_refresh = true;

      if (hit) {
        if (!config.drift_free) {
          ++refreshes;
          refresh_velocity(state, *solver, config.boundary, true);
          dt_cfl = cfl_dt(state, config);
          need_refresh = false;
        }
        take();
        ++next;
      }
    }
  } catch (const Error& e) {
    result.error = e.what();
  }
  audit.steps = state.steps;
  audit.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ringlab
