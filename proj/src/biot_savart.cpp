#include "ringlab/biot_savart.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "ringlab/error.hpp"
#include "ringlab/kernel_table.hpp"

namespace ringlab {
namespace {

constexpr double kPi = std::numbers::pi;

struct Source {
  double r, z, w;  // w = omega dr dz (or a block total)
};

std::vector<Source> gather_sources(const ScalarFieldRZ& omega) {
  const auto& g = omega.grid();
  const double cell = g.dr() * g.dz();
  std::vector<Source> out;
  for (int i = 1; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j)
      if (omega(i, j) != 0.0) out.push_back({g.r(i), g.z(j), omega(i, j) * cell});
  return out;
}

// \int_0^a \int_0^b log(x^2 + y^2) dy dx.
double log_cell_integral(double a, double b) {
  return a * b * std::log(a * a + b * b) - 3.0 * a * b + a * a * std::atan(b / a) +
         b * b * std::atan(a / b);
}

bool on_node(const GridSpec& g, const Point& p, int& i, int& j) {
  const double fi = p.r / g.dr();
  const double fj = (p.z - g.z_min) / g.dz();
  i = static_cast<int>(std::lround(fi));
  j = static_cast<int>(std::lround(fj));
  return i >= 1 && i <= g.nr && j >= 0 && j <= g.nz && std::abs(fi - i) < 1e-9 &&
         std::abs(fj - j) < 1e-9;
}

double green(const KernelTable& table, double rb, double zb, double r, double z) {
  const double dr = r - rb, dz = z - zb;
  const double rr = rb * r;
  return std::sqrt(rr) / (2.0 * kPi) * table.f((dr * dr + dz * dz) / rr);
}

Velocity velocity_kernel(const KernelTable& table, double rb, double zb, double r, double z) {
  const double dr = r - rb, dz = z - zb;
  const double rr = rb * r;
  const double xi2 = (dr * dr + dz * dz) / rr;
  const auto k = table.eval(xi2);
  const double rb32 = rb * std::sqrt(rb);
  const double sr = std::sqrt(r);
  return {dz / (kPi * rb32 * sr) * k.df,
          -dr / (kPi * rb32 * sr) * k.df + (k.f - 2.0 * xi2 * k.df) * sr / (4.0 * kPi * rb32)};
}

double stream_at(const KernelTable& table, const std::vector<Source>& sources, const Point& p) {
  double psi = 0.0;
  for (const auto& s : sources) {
    if (s.r == p.r && s.z == p.z) continue;
    psi += green(table, p.r, p.z, s.r, s.z) * s.w;
  }
  return psi;
}

}  // namespace

ScalarFieldRZ VelocityFieldRZ::magnitude() const {
  ScalarFieldRZ m(grid());
  for (std::size_t k = 0; k < m.values().size(); ++k)
    m.values()[k] = std::hypot(ur.values()[k], uz.values()[k]);
  return m;
}

double VelocityFieldRZ::sup() const {
  double m = 0.0;
  const auto& a = ur.values();
  const auto& b = uz.values();
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, a[k] * a[k] + b[k] * b[k]);
  return std::sqrt(m);
}

std::vector<double> stream_direct(const ScalarFieldRZ& omega_theta, std::span<const Point> points) {
  const auto& g = omega_theta.grid();
  const auto& table = KernelTable::instance();
  const auto sources = gather_sources(omega_theta);
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (p.r < 0.0) throw DomainError("stream_direct needs r >= 0");
    if (p.r == 0.0) {
      out.push_back(0.0);
      continue;
    }
    int i, j;
    Point q = p;
    const bool self = on_node(g, p, i, j);
    if (self) q = {g.r(i), g.z(j)};
    double psi = stream_at(table, sources, q);
    if (self && omega_theta(i, j) != 0.0) {
      const double a = 0.5 * g.dr(), b = 0.5 * g.dz();
      const double cell = (std::log(q.r) + std::log(8.0) - 2.0) * g.dr() * g.dz() -
                          2.0 * log_cell_integral(a, b);
      psi += omega_theta(i, j) * q.r / (2.0 * kPi) * cell;
    }
    out.push_back(psi);
  }
  return out;
}

std::vector<Velocity> velocity_direct(const ScalarFieldRZ& omega_theta,
                                      std::span<const Point> points) {
  const auto& g = omega_theta.grid();
  const auto& table = KernelTable::instance();
  const auto sources = gather_sources(omega_theta);
  std::vector<Velocity> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (p.r < 0.0) throw DomainError("velocity_direct needs r >= 0");
    Velocity u;
    if (p.r == 0.0) {
      for (const auto& s : sources) {
        const double dz = s.z - p.z;
        const double d2 = s.r * s.r + dz * dz;
        u.uz += 0.5 * s.r * s.r / (d2 * std::sqrt(d2)) * s.w;
      }
      out.push_back(u);
      continue;
    }
    int i, j;
    Point q = p;
    if (on_node(g, p, i, j)) q = {g.r(i), g.z(j)};
    for (const auto& s : sources) {
      if (s.r == q.r && s.z == q.z) continue;
      const auto k = velocity_kernel(table, q.r, q.z, s.r, s.z);
      u.ur += k.ur * s.w;
      u.uz += k.uz * s.w;
    }
    out.push_back(u);
  }
  return out;
}

VelocityFieldRZ velocity_from_stream(const StreamField& stream) {
  VelocityFieldRZ u(stream.psi.grid());
  velocity_from_stream_into(stream.psi, u);
  return u;
}

void velocity_from_stream_into(const ScalarFieldRZ& psi, VelocityFieldRZ& u) {
  const auto& g = psi.grid();
  if (!(u.grid() == g)) u = VelocityFieldRZ(g);
  const double dr = g.dr(), dz = g.dz();
  const int nr = g.nr, nz = g.nz;
  // psi is even in r across the axis.
  auto p = [&](int i, int j) { return psi(i < 0 ? -i : i, j); };
  for (int j = 0; j <= nz; ++j) {
    u.ur(0, j) = 0.0;
    u.uz(0, j) = 2.0 * psi(1, j) / (dr * dr);
  }
  const double c4z = 1.0 / (12.0 * dz), c4r = 1.0 / (12.0 * dr);
  for (int i = 1; i <= nr; ++i) {
    const double r = g.r(i);
    const bool fourth_r = i < nr - 1;
    for (int j = 0; j <= nz; ++j) {
      double pz;
      if (j >= 2 && j <= nz - 2) pz = (8.0 * (p(i, j + 1) - p(i, j - 1)) - (p(i, j + 2) - p(i, j - 2))) * c4z;
      else if (j == 0) pz = (-3.0 * p(i, 0) + 4.0 * p(i, 1) - p(i, 2)) / (2.0 * dz);
      else if (j == nz) pz = (3.0 * p(i, nz) - 4.0 * p(i, nz - 1) + p(i, nz - 2)) / (2.0 * dz);
      else pz = (p(i, j + 1) - p(i, j - 1)) / (2.0 * dz);
      double pr;
      if (fourth_r) pr = (8.0 * (p(i + 1, j) - p(i - 1, j)) - (p(i + 2, j) - p(i - 2, j))) * c4r;
      else if (i == nr) pr = (3.0 * p(nr, j) - 4.0 * p(nr - 1, j) + p(nr - 2, j)) / (2.0 * dr);
      else pr = (p(i + 1, j) - p(i - 1, j)) / (2.0 * dr);
      u.ur(i, j) = -pz / r;
      u.uz(i, j) = pr / r;
    }
  }
}

void fill_boundary_stream(const ScalarFieldRZ& omega_theta, ScalarFieldRZ& psi, BoundaryMode mode) {
  const auto& g = omega_theta.grid();
  if (!(psi.grid() == g)) throw DomainError("boundary fill needs matching grids");
  const auto& table = KernelTable::instance();
  for (int j = 0; j <= g.nz; ++j) psi(0, j) = 0.0;

  if (mode == BoundaryMode::kExact) {
    const auto sources = gather_sources(omega_theta);
    auto at = [&](int i, int j) { return stream_at(table, sources, {g.r(i), g.z(j)}); };
    for (int i = 1; i <= g.nr; ++i) {
      psi(i, 0) = at(i, 0);
      psi(i, g.nz) = at(i, g.nz);
    }
    for (int j = 1; j < g.nz; ++j) psi(g.nr, j) = at(g.nr, j);
    return;
  }

  // Three-level lumping (64, 16 and 4 node blocks, then single nodes). A block
  // far enough from the target acts as one source at its |omega|-centroid,
  // corrected by its first and second moments about that point.
  constexpr int kLevels[] = {64, 16, 4};
  constexpr int kStride = 4;
  struct Block {
    Source lump;
    int i0, j0, size;
    double reach;
    double mr, mz, crr, crz, czz;
    std::vector<Block> kids;
  };
  const double cell = g.dr() * g.dz();
  const double diag = std::hypot(g.dr(), g.dz());
  // Sources below this weight cannot move psi at double precision.
  double total = 0.0;
  for (int i = 1; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) total += std::abs(omega_theta(i, j));
  const double negligible = 1e-17 * total * cell;
  std::function<bool(int, int, int, Block&)> make_block = [&](int level, int i0, int j0, Block& b) {
    const int size = kLevels[level];
    const int i1 = std::min(i0 + size, g.nr + 1), j1 = std::min(j0 + size, g.nz + 1);
    double w = 0.0, wr = 0.0, wz = 0.0, wa = 0.0;
    for (int i = i0; i < i1; ++i)
      for (int j = j0; j < j1; ++j) {
        const double v = omega_theta(i, j) * cell;
        w += v;
        wa += std::abs(v);
        wr += std::abs(v) * g.r(i);
        wz += std::abs(v) * g.z(j);
      }
    if (wa <= negligible) return false;
    b = {{wr / wa, wz / wa, w}, i0, j0, size, 4.0 * size * diag, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
    for (int i = i0; i < i1; ++i)
      for (int j = j0; j < j1; ++j) {
        const double v = omega_theta(i, j) * cell;
        const double x = g.r(i) - b.lump.r, y = g.z(j) - b.lump.z;
        b.mr += v * x;
        b.mz += v * y;
        b.crr += 0.5 * v * x * x;
        b.crz += v * x * y;
        b.czz += 0.5 * v * y * y;
      }
    if (level + 1 < static_cast<int>(std::size(kLevels))) {
      const int step = kLevels[level + 1];
      for (int i = i0; i < i1; i += step)
        for (int j = j0; j < j1; j += step)
          if (Block c; make_block(level + 1, i, j, c)) b.kids.push_back(std::move(c));
    }
    return true;
  };
  std::vector<Block> roots;
  for (int i0 = 1; i0 <= g.nr; i0 += kLevels[0])
    for (int j0 = 0; j0 <= g.nz; j0 += kLevels[0])
      if (Block b; make_block(0, i0, j0, b)) roots.push_back(std::move(b));

  // G and its gradient in the source position (rs, zs).
  struct GreenGrad {
    double g, gr, gz;
  };
  auto green_grad = [&](double r, double z, double rs, double zs) {
    const double dr = r - rs, dz = z - zs, rr = r * rs;
    const double xi2 = (dr * dr + dz * dz) / rr;
    const auto k = table.eval(xi2);
    const double amp = std::sqrt(rr) / (2.0 * kPi);
    return GreenGrad{amp * k.f, amp * (0.5 * k.f / rs + k.df * (-2.0 * dr / rr - xi2 / rs)),
                     amp * k.df * (-2.0 * dz / rr)};
  };
  const double step = 0.25 * std::min(g.dr(), g.dz());
  auto lump = [&](double r, double z, const Block& b) {
    const auto c = green_grad(r, z, b.lump.r, b.lump.z);
    const auto pr = green_grad(r, z, b.lump.r + step, b.lump.z);
    const auto pz = green_grad(r, z, b.lump.r, b.lump.z + step);
    const double grr = (pr.gr - c.gr) / step, gzz = (pz.gz - c.gz) / step;
    const double grz = 0.5 * ((pr.gz - c.gz) + (pz.gr - c.gr)) / step;
    return c.g * b.lump.w + b.mr * c.gr + b.mz * c.gz + b.crr * grr + b.crz * grz + b.czz * gzz;
  };
  std::function<double(double, double, int, int, const Block&)> visit =
      [&](double r, double z, int i, int j, const Block& b) {
        if (std::hypot(b.lump.r - r, b.lump.z - z) > b.reach) return lump(r, z, b);
        double sum = 0.0;
        if (!b.kids.empty() || b.size > kLevels[std::size(kLevels) - 1]) {
          for (const auto& c : b.kids) sum += visit(r, z, i, j, c);
          return sum;
        }
        for (int ii = b.i0; ii < std::min(b.i0 + b.size, g.nr + 1); ++ii)
          for (int jj = b.j0; jj < std::min(b.j0 + b.size, g.nz + 1); ++jj) {
            const double v = omega_theta(ii, jj);
            if (v == 0.0 || (ii == i && jj == j)) continue;
            sum += green(table, r, z, g.r(ii), g.z(jj)) * v * cell;
          }
        return sum;
      };
  auto at = [&](int i, int j) {
    const double r = g.r(i), z = g.z(j);
    double sum = 0.0;
    for (const auto& b : roots) sum += visit(r, z, i, j, b);
    return sum;
  };
  // Sample every kStride-th node of an edge; cubic Lagrange in between.
  auto edge = [&](int n, auto node, auto store) {
    std::vector<int> ks;
    for (int k = 0; k <= n; k += kStride) ks.push_back(k);
    if (ks.back() != n) ks.push_back(n);
    std::vector<double> vs(ks.size());
    for (std::size_t a = 0; a < ks.size(); ++a) vs[a] = node(ks[a]);
    const std::size_t last = ks.size() - 1;
    for (std::size_t a = 0; a < last; ++a) {
      store(ks[a], vs[a]);
      const std::size_t lo = last < 3 ? 0 : std::min(a == 0 ? 0 : a - 1, last - 3);
      const std::size_t hi = std::min(lo + 3, last);
      for (int m = ks[a] + 1; m < ks[a + 1]; ++m) {
        double v = 0.0;
        for (std::size_t p = lo; p <= hi; ++p) {
          double w = 1.0;
          for (std::size_t q = lo; q <= hi; ++q)
            if (q != p) w *= static_cast<double>(m - ks[q]) / (ks[p] - ks[q]);
          v += w * vs[p];
        }
        store(m, v);
      }
    }
    store(n, vs[last]);
  };
  edge(g.nr, [&](int i) { return i == 0 ? 0.0 : at(i, 0); }, [&](int i, double v) { if (i > 0) psi(i, 0) = v; });
  edge(g.nr, [&](int i) { return i == 0 ? 0.0 : at(i, g.nz); }, [&](int i, double v) { if (i > 0) psi(i, g.nz) = v; });
  edge(g.nz, [&](int j) { return j == 0 ? psi(g.nr, 0) : (j == g.nz ? psi(g.nr, g.nz) : at(g.nr, j)); },
       [&](int j, double v) { psi(g.nr, j) = v; });
}

void write_probe_csv(std::ostream& out, std::span<const Point> points,
                     std::span<const Velocity> values, std::string_view route, bool header) {
  if (points.size() != values.size()) throw DomainError("probe dump needs one value per point");
  if (header) out << "r,z,ur,uz,route\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < points.size(); ++k)
    out << points[k].r << ',' << points[k].z << ',' << values[k].ur << ',' << values[k].uz << ','
        << route << '\n';
}

}  // namespace ringlab
