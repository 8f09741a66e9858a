#include "ringlab/elliptic.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "ringlab/error.hpp"

namespace ringlab {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double rhs_norm(const ScalarFieldRZ& omega) {
  const auto& g = omega.grid();
  double s = 0.0;
  for (int i = 1; i < g.nr; ++i)
    for (int j = 1; j < g.nz; ++j) {
      const double v = g.r(i) * omega(i, j);
      s += v * v;
    }
  return std::sqrt(s);
}

}  // namespace

// l2 norm of L_h psi + source over interior nodes.
static double source_residual(const ScalarFieldRZ& source, const ScalarFieldRZ& psi) {
  const auto& g = source.grid();
  const double idr2 = 1.0 / (g.dr() * g.dr()), idz2 = 1.0 / (g.dz() * g.dz());
  double s = 0.0;
  for (int i = 1; i < g.nr; ++i) {
    const double half = 0.5 / (g.r(i) * g.dr());
    for (int j = 1; j < g.nz; ++j) {
      const double res = (psi(i + 1, j) - 2.0 * psi(i, j) + psi(i - 1, j)) * idr2 -
                         (psi(i + 1, j) - psi(i - 1, j)) * half +
                         (psi(i, j + 1) - 2.0 * psi(i, j) + psi(i, j - 1)) * idz2 + source(i, j);
      s += res * res;
    }
  }
  return std::sqrt(s);
}

// Leading truncation error of L_h: dr^2 (psi_rrrr / 12 - psi_rrr / (6 r)) + dz^2 psi_zzzz / 12,
// from differences of psi (even across the axis); zero within two nodes of the outer edges.
static ScalarFieldRZ truncation_error(const ScalarFieldRZ& psi) {
  const auto& g = psi.grid();
  ScalarFieldRZ tau(g);
  const double dr = g.dr(), dz = g.dz();
  auto at = [&](int i, int j) { return psi(std::abs(i), j); };
  for (int i = 1; i <= g.nr - 2; ++i) {
    const double r = g.r(i);
    for (int j = 2; j <= g.nz - 2; ++j) {
      const double p4 = at(i + 2, j) - 4.0 * at(i + 1, j) + 6.0 * at(i, j) - 4.0 * at(i - 1, j) + at(i - 2, j);
      const double p3 = at(i + 2, j) - 2.0 * at(i + 1, j) + 2.0 * at(i - 1, j) - at(i - 2, j);
      const double z4 = psi(i, j + 2) - 4.0 * psi(i, j + 1) + 6.0 * psi(i, j) - 4.0 * psi(i, j - 1) + psi(i, j - 2);
      tau(i, j) = p4 / (12.0 * dr * dr) - p3 / (12.0 * r * dr) + z4 / (12.0 * dz * dz);
    }
  }
  return tau;
}

double stream_residual(const ScalarFieldRZ& omega, const ScalarFieldRZ& psi) {
  const auto& g = omega.grid();
  const double idr2 = 1.0 / (g.dr() * g.dr()), idz2 = 1.0 / (g.dz() * g.dz());
  double s = 0.0;
  for (int i = 1; i < g.nr; ++i) {
    const double r = g.r(i);
    const double half = 0.5 / (r * g.dr());
    for (int j = 1; j < g.nz; ++j) {
      const double res = (psi(i + 1, j) - 2.0 * psi(i, j) + psi(i - 1, j)) * idr2 -
                         (psi(i + 1, j) - psi(i - 1, j)) * half +
                         (psi(i, j + 1) - 2.0 * psi(i, j) + psi(i, j - 1)) * idz2 + r * omega(i, j);
      s += res * res;
    }
  }
  return std::sqrt(s);
}

struct StreamSolver::Impl {
  GridSpec grid;
  EllipticOptions options;
  int m = 0;  // interior z nodes
  double* buffer = nullptr;
  fftw_plan plan = nullptr;
  std::vector<double> eig;
  std::vector<double> factor_inv, factor_c;
  ScalarFieldRZ source;  // r omega minus the truncation correction

  Impl(const GridSpec& g, EllipticOptions o) : grid(g), options(o), m(g.nz - 1) {
    g.validate();
    if (options.method == EllipticMethod::kDirect) {
      buffer = fftw_alloc_real(static_cast<std::size_t>(g.rows()) * static_cast<std::size_t>(m));
      int n[] = {m};
      const fftw_r2r_kind kind[] = {FFTW_RODFT00};
      std::lock_guard lock(planner_mutex());
      plan = fftw_plan_many_r2r(1, n, g.rows(), buffer, nullptr, 1, m, buffer, nullptr, 1, m,
                                kind, FFTW_ESTIMATE);
      if (!plan) throw SolverError("could not create sine transform plan", 0.0);
      eig.resize(static_cast<std::size_t>(m));
      const double dz = g.dz();
      for (int k = 0; k < m; ++k) {
        const double s = std::sin(std::numbers::pi * (k + 1) / (2.0 * g.nz));
        eig[static_cast<std::size_t>(k)] = -4.0 * s * s / (dz * dz);
      }
      // LU factors of the radial tridiagonal system of every mode.
      const double idr2 = 1.0 / (g.dr() * g.dr());
      factor_inv.assign(static_cast<std::size_t>(g.rows()) * m, 0.0);
      factor_c.assign(factor_inv.size(), 0.0);
      for (int k = 0; k < m; ++k) {
        double c_prev = 0.0;
        for (int i = 1; i < g.nr; ++i) {
          const double half = 0.5 / (i * g.dr() * g.dr());
          const double a = i == 1 ? 0.0 : idr2 + half, c = idr2 - half;
          const double b = -2.0 * idr2 + eig[static_cast<std::size_t>(k)];
          const double inv = 1.0 / (b - a * c_prev);
          factor_inv[static_cast<std::size_t>(i) * m + k] = inv;
          factor_c[static_cast<std::size_t>(i) * m + k] = c * inv;
          c_prev = c * inv;
        }
      }
    }
  }

  ~Impl() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    if (buffer) fftw_free(buffer);
  }

  double& buf(int i, int k) { return buffer[static_cast<std::size_t>(i) * m + k]; }

  // Solves L_h psi = -source with the edge values of psi.
  void solve_direct(const ScalarFieldRZ& source, ScalarFieldRZ& psi) {
    const auto& g = grid;
    const int nr = g.nr, nz = g.nz;
    const double idr2 = 1.0 / (g.dr() * g.dr()), idz2 = 1.0 / (g.dz() * g.dz());
    // Right-hand side with z-edge data moved over; rows 0 and nr carry the
    // r-edge data itself so the transform also yields their modes.
    for (int i = 0; i <= nr; ++i) {
      for (int j = 1; j < nz; ++j) {
        double v;
        if (i == 0 || i == nr) {
          v = psi(i, j);
        } else {
          v = -source(i, j);
          if (j == 1) v -= psi(i, 0) * idz2;
          if (j == nz - 1) v -= psi(i, nz) * idz2;
        }
        buf(i, j - 1) = v;
      }
    }
    fftw_execute(plan);
    // Thomas sweep on rows 1..nr-1 for all modes at once; rows 0 and nr hold
    // the transformed edge data.
    for (int i = 1; i < nr; ++i) {
      const double half = 0.5 / (i * g.dr() * g.dr());
      const double a = idr2 + half, c = idr2 - half;
      const double* inv = &factor_inv[static_cast<std::size_t>(i) * m];
      double* row = &buf(i, 0);
      const double* prev = &buf(i - 1, 0);
      const double* right = &buf(nr, 0);
      for (int k = 0; k < m; ++k) {
        double d = row[k] - a * prev[k];
        if (i == nr - 1) d -= c * right[k];
        row[k] = d * inv[k];
      }
    }
    for (int i = nr - 2; i >= 1; --i) {
      const double* cp = &factor_c[static_cast<std::size_t>(i) * m];
      double* row = &buf(i, 0);
      const double* next = &buf(i + 1, 0);
      for (int k = 0; k < m; ++k) row[k] -= cp[k] * next[k];
    }
    fftw_execute(plan);
    const double norm = 1.0 / (2.0 * (m + 1));
    for (int i = 1; i < nr; ++i)
      for (int j = 1; j < nz; ++j) psi(i, j) = buf(i, j - 1) * norm;
  }

  int solve_sor(const ScalarFieldRZ& source, ScalarFieldRZ& psi, double target) {
    const auto& g = grid;
    const double idr2 = 1.0 / (g.dr() * g.dr()), idz2 = 1.0 / (g.dz() * g.dz());
    const double diag = 2.0 * idr2 + 2.0 * idz2;
    const double rho = 0.5 * (std::cos(std::numbers::pi / g.nr) + std::cos(std::numbers::pi / g.nz));
    const double w = 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
    for (int i = 1; i < g.nr; ++i)
      for (int j = 1; j < g.nz; ++j) psi(i, j) = 0.0;
    int it = 0;
    const int check_every = 25;
    while (it < options.max_iterations) {
      for (int colour = 0; colour < 2; ++colour) {
        for (int i = 1; i < g.nr; ++i) {
          const double half = 0.5 / (g.r(i) * g.dr());
          const double a = idr2 + half, c = idr2 - half;
          for (int j = 1 + ((i + colour + 1) & 1); j < g.nz; j += 2) {
            const double gs = (a * psi(i - 1, j) + c * psi(i + 1, j) +
                               idz2 * (psi(i, j - 1) + psi(i, j + 1)) + source(i, j)) / diag;
            psi(i, j) += w * (gs - psi(i, j));
          }
        }
      }
      ++it;
      if (it % check_every == 0 && source_residual(source, psi) <= target) break;
    }
    return it;
  }
};

StreamSolver::StreamSolver(const GridSpec& grid, EllipticOptions options)
    : impl_(std::make_unique<Impl>(grid, options)) {}
StreamSolver::~StreamSolver() = default;
StreamSolver::StreamSolver(StreamSolver&&) noexcept = default;
StreamSolver& StreamSolver::operator=(StreamSolver&&) noexcept = default;

const GridSpec& StreamSolver::grid() const noexcept { return impl_->grid; }

SolveStats StreamSolver::solve(const ScalarFieldRZ& omega_theta, ScalarFieldRZ& psi) {
  const auto& g = impl_->grid;
  if (!(omega_theta.grid() == g) || !(psi.grid() == g))
    throw DomainError("stream solve needs fields on the solver grid");
  if (!omega_theta.all_finite()) throw StateError("non-finite vorticity passed to the stream solve");
  for (int j = 0; j <= g.nz; ++j) psi(0, j) = 0.0;
  SolveStats stats;
  stats.rhs_norm = rhs_norm(omega_theta);
  // Boundary data alone still needs a scale when omega vanishes.
  double edge = 0.0;
  for (int i = 0; i <= g.nr; ++i) edge = std::max({edge, std::abs(psi(i, 0)), std::abs(psi(i, g.nz))});
  for (int j = 0; j <= g.nz; ++j) edge = std::max(edge, std::abs(psi(g.nr, j)));
  const double h2 = std::min(g.dr() * g.dr(), g.dz() * g.dz());
  const double scale = std::max(stats.rhs_norm, edge / h2 * std::sqrt(static_cast<double>(g.size())));
  const double target = impl_->options.rel_tol * scale;

  if (!(impl_->source.grid() == g)) impl_->source = ScalarFieldRZ(g);
  auto& source = impl_->source;
  for (int i = 1; i < g.nr; ++i)
    for (int j = 1; j < g.nz; ++j) source(i, j) = g.r(i) * omega_theta(i, j);
  auto once = [&] {
    if (impl_->options.method == EllipticMethod::kDirect) {
      impl_->solve_direct(source, psi);
      return 1;
    }
    return impl_->solve_sor(source, psi, target);
  };
  stats.iterations = once();
  if (impl_->options.deferred_correction) {
    const auto tau = truncation_error(psi);
    for (std::size_t k = 0; k < source.values().size(); ++k) source.values()[k] -= tau.values()[k];
    stats.iterations += once();
  }
  stats.residual = source_residual(source, psi);
  if (!(stats.residual <= target)) {
    std::ostringstream msg;
    msg << "stream solve residual " << stats.residual << " exceeds " << target << " after "
        << stats.iterations << " iterations";
    throw SolverError(msg.str(), stats.residual);
  }
  return stats;
}

StreamField solve_stream_elliptic(const ScalarFieldRZ& omega_theta, const EllipticOptions& options) {
  const auto& g = omega_theta.grid();
  g.validate();
  const double peak = omega_theta.max_abs();
  auto edge_ok = [&](double v) { return std::abs(v) <= 1e-12 * peak; };
  for (int i = 0; i <= g.nr; ++i)
    if (!edge_ok(omega_theta(i, 0)) || !edge_ok(omega_theta(i, g.nz)))
      throw DomainError("omega_theta must vanish on the outer edges");
  for (int j = 0; j <= g.nz; ++j)
    if (!edge_ok(omega_theta(g.nr, j))) throw DomainError("omega_theta must vanish on the outer edges");
  StreamField out{ScalarFieldRZ(g)};
  fill_boundary_stream(omega_theta, out.psi, options.boundary);
  StreamSolver solver(g, options);
  solver.solve(omega_theta, out.psi);
  return out;
}

}  // namespace ringlab
