#pragma once

#include <span>
#include <vector>

#include "ringlab/grid.hpp"

namespace ringlab {

/// One mollified ring: circulation kappa, radius r0, height z0, scale eps.
struct RingSpec {
  double kappa = 1.0;
  double r0 = 1.0;
  double z0 = 0.0;
  double eps = 0.1;

  /// Throws ConfigError unless r0 > 0 and 0 < eps < r0 / 2.
  void validate() const;
};

/// The bump c exp(-1 / (1 - |y|^2)) on the unit disk, c normalising its mass to 1.
struct Mollifier {
  static double normalisation();
  static double profile(double y1, double y2);
};

/// Minimum number of grid spacings per mollification scale.
inline constexpr double kMinNodesPerEps = 4.0;

/// eta_0 = sum_i (kappa_i / r0_i) eps_i^{-2} profile((r - r0_i) / eps_i, (z - z0_i) / eps_i)
/// sampled at nodes. Throws ConfigError for mixed signs, under-resolved eps,
/// or supports closer than 4 eps to the outer edges.
ScalarFieldRZ make_mollified_ring(const GridSpec& grid, std::span<const RingSpec> rings);

/// Quadrature weight of node row i for 2 pi \int g r^alpha r dr dz, without dz.
/// Rows i >= 1 carry 2 pi r_i^{alpha + 1} dr; the axis row carries the exact
/// half-cell integral 2 pi (dr / 2)^{alpha + 2} / (alpha + 2).
double row_weight(const GridSpec& grid, int i, double alpha);

/// (2 pi \int |f|^p r dr dz)^{1/p}; p = infinity gives max |f|.
double norm_lp_3d(const ScalarFieldRZ& f, double p);

/// 2 pi \int |f| r^alpha r dr dz.
double weighted_moment(const ScalarFieldRZ& f, double alpha);

/// 2 pi \int eta r^2 r dr dz, signed.
double signed_momentum_z(const ScalarFieldRZ& eta);

/// |eta|-weighted centroid (r, z) in the 3D measure r dr dz.
struct Centroid {
  double r = 0.0;
  double z = 0.0;
};
Centroid centroid(const ScalarFieldRZ& eta);

/// omega_theta = r eta at every node.
ScalarFieldRZ omega_from_eta(const ScalarFieldRZ& eta);

}  // namespace ringlab
