#pragma once

// Stream function from omega_theta:
//   psi_rr - psi_r / r + psi_zz = -r omega_theta,
// psi = 0 on the axis and Dirichlet data on the three outer edges.

#include <memory>

#include "ringlab/biot_savart.hpp"
#include "ringlab/grid.hpp"

namespace ringlab {

enum class EllipticMethod {
  kDirect,  ///< sine transform in z, tridiagonal solve in r per mode
  kSor,     ///< red-black successive over-relaxation
};

struct EllipticOptions {
  EllipticMethod method = EllipticMethod::kDirect;
  BoundaryMode boundary = BoundaryMode::kExact;
  double rel_tol = 1e-10;  ///< residual bound relative to ||r omega||_2
  int max_iterations = 200000;
  /// Second solve with the leading truncation error moved to the source
  /// (fourth order for smooth data).
  bool deferred_correction = true;
};

struct SolveStats {
  double residual = 0.0;  ///< l2 norm of the discrete residual of the last solve
  double rhs_norm = 0.0;
  int iterations = 0;
};

/// Reusable solver for one grid. The sine-transform plans are built once.
class StreamSolver {
 public:
  explicit StreamSolver(const GridSpec& grid, EllipticOptions options = {});
  ~StreamSolver();
  StreamSolver(StreamSolver&&) noexcept;
  StreamSolver& operator=(StreamSolver&&) noexcept;

  /// Solves with the edge values already present in `psi` (interior values
  /// are overwritten). Throws SolverError if the residual bound is missed.
  SolveStats solve(const ScalarFieldRZ& omega_theta, ScalarFieldRZ& psi);

  const GridSpec& grid() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Full solve: boundary from direct quadrature, then the interior problem.
/// Throws DomainError if omega_theta does not vanish on the outer edges.
StreamField solve_stream_elliptic(const ScalarFieldRZ& omega_theta,
                                  const EllipticOptions& options = {});

/// l2 norm of psi_rr - psi_r / r + psi_zz + r omega over interior nodes.
double stream_residual(const ScalarFieldRZ& omega_theta, const ScalarFieldRZ& psi);

}  // namespace ringlab
