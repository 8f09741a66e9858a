#pragma once

// Velocity recovery from omega_theta = r eta: direct quadrature of the
// axisymmetric kernels (the oracle route) and reconstruction from a stream
// function (the fast route, see elliptic.hpp).

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ringlab/grid.hpp"

namespace ringlab {

struct Point {
  double r = 0.0;
  double z = 0.0;
};

struct Velocity {
  double ur = 0.0;
  double uz = 0.0;
};

struct VelocityFieldRZ {
  ScalarFieldRZ ur;
  ScalarFieldRZ uz;

  VelocityFieldRZ() = default;
  explicit VelocityFieldRZ(const GridSpec& grid) : ur(grid), uz(grid) {}

  const GridSpec& grid() const noexcept { return ur.grid(); }
  /// Node values of sqrt(ur^2 + uz^2).
  ScalarFieldRZ magnitude() const;
  /// max over nodes of |u|.
  double sup() const;
  bool all_finite() const { return ur.all_finite() && uz.all_finite(); }
};

struct StreamField {
  ScalarFieldRZ psi;
};

/// psi at each point by plane quadrature sum G omega dr dz. A point on a
/// source node drops that node and adds the integral of the log expansion of
/// G over its cell.
std::vector<double> stream_direct(const ScalarFieldRZ& omega_theta, std::span<const Point> points);

/// (u_r, u_z) at each point by quadrature of the velocity kernels; a source
/// node under the point is dropped (principal value). On the axis u_r = 0 and
/// u_z uses the on-axis ring formula.
std::vector<Velocity> velocity_direct(const ScalarFieldRZ& omega_theta,
                                      std::span<const Point> points);

/// Centred differences of psi (fourth order inside, psi taken even across the
/// axis); u_r = -psi_z / r, u_z = psi_r / r. Axis row: u_r = 0,
/// u_z = 2 psi(dr, z) / dr^2. Second order within two nodes of the outer edges.
VelocityFieldRZ velocity_from_stream(const StreamField& stream);
void velocity_from_stream_into(const ScalarFieldRZ& psi, VelocityFieldRZ& u);

enum class BoundaryMode {
  kExact,  ///< every edge node from the full source sum
  kFast,   ///< every 4th edge node, cubic in between; far blocks as second-moment lumps
};

/// Writes psi on the outer edges (i = nr, j = 0, j = nz) of `psi` from the
/// direct quadrature of omega_theta. Axis values are set to 0.
void fill_boundary_stream(const ScalarFieldRZ& omega_theta, ScalarFieldRZ& psi,
                          BoundaryMode mode = BoundaryMode::kExact);

/// Probe dump with columns r, z, ur, uz, route.
void write_probe_csv(std::ostream& out, std::span<const Point> points,
                     std::span<const Velocity> values, std::string_view route, bool header = true);

}  // namespace ringlab
