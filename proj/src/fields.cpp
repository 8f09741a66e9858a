#include "ringlab/fields.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ringlab/error.hpp"
#include "ringlab/quadrature.hpp"

namespace ringlab {
namespace {

constexpr double kPi = std::numbers::pi;

template <class Term>
double weighted_sum(const GridSpec& g, double alpha, Term term) {
  double total = 0.0;
  for (int i = 0; i <= g.nr; ++i) {
    double row = 0.0;
    for (int j = 0; j <= g.nz; ++j) row += term(i, j);
    total += row * row_weight(g, i, alpha);
  }
  return total * g.dz();
}

}  // namespace

void RingSpec::validate() const {
  std::ostringstream msg;
  if (!std::isfinite(kappa) || !std::isfinite(z0)) msg << "ring kappa and z0 must be finite";
  else if (!(r0 > 0.0) || !std::isfinite(r0)) msg << "ring radius must be positive";
  else if (!(eps > 0.0) || !(eps < 0.5 * r0))
    msg << "ring needs 0 < eps < r0/2 (eps = " << eps << ", r0 = " << r0 << ")";
  else return;
  throw ConfigError(msg.str());
}

double Mollifier::normalisation() {
  static const double c = [] {
    auto radial = [](double rho) {
      const double q = 1.0 - rho * rho;
      return q > 0.0 ? std::exp(-1.0 / q) * rho : 0.0;
    };
    const auto q = integrate_adaptive(radial, 0.0, 1.0, 1e-15, 1e-14, 500);
    return 1.0 / (2.0 * kPi * q.value);
  }();
  return c;
}

double Mollifier::profile(double y1, double y2) {
  const double q = 1.0 - (y1 * y1 + y2 * y2);
  return q > 0.0 ? normalisation() * std::exp(-1.0 / q) : 0.0;
}

ScalarFieldRZ make_mollified_ring(const GridSpec& grid, std::span<const RingSpec> rings) {
  grid.validate();
  int sign = 0;
  const double h = std::max(grid.dr(), grid.dz());
  for (const auto& ring : rings) {
    ring.validate();
    const int s = ring.kappa > 0.0 ? 1 : (ring.kappa < 0.0 ? -1 : 0);
    if (s != 0 && sign != 0 && s != sign)
      throw ConfigError("all ring circulations must share one sign");
    if (s != 0) sign = s;
    if (ring.eps < kMinNodesPerEps * h) {
      std::ostringstream msg;
      msg << "eps = " << ring.eps << " is under-resolved; need eps >= " << kMinNodesPerEps
          << " * max(dr, dz) = " << kMinNodesPerEps * h;
      throw ConfigError(msg.str());
    }
    const double margin = 4.0 * ring.eps;
    if (ring.r0 + ring.eps + margin > grid.r_max || ring.z0 - ring.eps - margin < grid.z_min ||
        ring.z0 + ring.eps + margin > grid.z_max)
      throw ConfigError("ring support plus a 4 eps margin does not fit in the grid");
  }

  ScalarFieldRZ eta(grid);
  for (const auto& ring : rings) {
    if (ring.kappa == 0.0) continue;
    const double amp = ring.kappa / (ring.r0 * ring.eps * ring.eps);
    const int i_lo = std::max(0, static_cast<int>(std::floor((ring.r0 - ring.eps) / grid.dr())));
    const int i_hi = std::min(grid.nr, static_cast<int>(std::ceil((ring.r0 + ring.eps) / grid.dr())));
    const int j_lo = std::max(0, static_cast<int>(std::floor((ring.z0 - ring.eps - grid.z_min) / grid.dz())));
    const int j_hi = std::min(grid.nz, static_cast<int>(std::ceil((ring.z0 + ring.eps - grid.z_min) / grid.dz())));
    for (int i = i_lo; i <= i_hi; ++i)
      for (int j = j_lo; j <= j_hi; ++j)
        eta(i, j) += amp * Mollifier::profile((grid.r(i) - ring.r0) / ring.eps,
                                              (grid.z(j) - ring.z0) / ring.eps);
  }
  return eta;
}

double row_weight(const GridSpec& grid, int i, double alpha) {
  const double dr = grid.dr();
  if (i == 0) return 2.0 * kPi * std::pow(0.5 * dr, alpha + 2.0) / (alpha + 2.0);
  return 2.0 * kPi * std::pow(grid.r(i), alpha + 1.0) * dr;
}

double norm_lp_3d(const ScalarFieldRZ& f, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("norm_lp_3d needs p >= 1");
  if (std::isinf(p)) return f.max_abs();
  const auto& g = f.grid();
  if (p == 1.0) return weighted_sum(g, 0.0, [&](int i, int j) { return std::abs(f(i, j)); });
  // Scale by the sup to keep |f|^p representable.
  const double m = f.max_abs();
  if (m == 0.0) return 0.0;
  const double s = weighted_sum(g, 0.0, [&](int i, int j) { return std::pow(std::abs(f(i, j)) / m, p); });
  return m * std::pow(s, 1.0 / p);
}

double weighted_moment(const ScalarFieldRZ& f, double alpha) {
  if (!(alpha > -2.0)) throw DomainError("weighted_moment needs alpha > -2");
  return weighted_sum(f.grid(), alpha, [&](int i, int j) { return std::abs(f(i, j)); });
}

double signed_momentum_z(const ScalarFieldRZ& eta) {
  return weighted_sum(eta.grid(), 2.0, [&](int i, int j) { return eta(i, j); });
}

Centroid centroid(const ScalarFieldRZ& eta) {
  const auto& g = eta.grid();
  const double mass = weighted_sum(g, 0.0, [&](int i, int j) { return std::abs(eta(i, j)); });
  if (mass == 0.0) return {};
  const double zr = weighted_sum(g, 0.0, [&](int i, int j) { return std::abs(eta(i, j)) * g.z(j); });
  const double rr = weighted_sum(g, 1.0, [&](int i, int j) { return std::abs(eta(i, j)); });
  return {rr / mass, zr / mass};
}

ScalarFieldRZ omega_from_eta(const ScalarFieldRZ& eta) {
  ScalarFieldRZ w(eta.grid());
  const auto& g = eta.grid();
  for (int i = 0; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) w(i, j) = g.r(i) * eta(i, j);
  return w;
}

}  // namespace ringlab
