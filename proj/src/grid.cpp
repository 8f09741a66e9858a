#include "ringlab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ringlab/error.hpp"

namespace ringlab {

static_assert(std::endian::native == std::endian::little,
              "snapshot IO assumes a little-endian host");

void GridSpec::validate() const {
  std::ostringstream msg;
  if (nr < 8 || nz < 8) msg << "grid needs nr, nz >= 8 (got " << nr << ", " << nz << ")";
  else if (!(r_max > 0.0) || !std::isfinite(r_max)) msg << "grid r_max must be positive";
  else if (!(z_min < z_max) || !std::isfinite(z_min) || !std::isfinite(z_max))
    msg << "grid needs z_min < z_max";
  else return;
  throw ConfigError(msg.str());
}

GridSpec GridSpec::refined(int factor) const {
  if (factor < 1) throw ConfigError("refinement factor must be >= 1");
  GridSpec g = *this;
  g.nr *= factor;
  g.nz *= factor;
  return g;
}

std::uint64_t GridSpec::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < n; ++k) {
      h ^= b[k];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t ints[2] = {nr, nz};
  const double reals[3] = {r_max, z_min, z_max};
  mix(ints, sizeof ints);
  mix(reals, sizeof reals);
  return h;
}

ScalarFieldRZ::ScalarFieldRZ(const GridSpec& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

bool ScalarFieldRZ::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarFieldRZ::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarFieldRZ::min_value() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

void write_binary(const ScalarFieldRZ& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto& g = f.grid();
  const std::int64_t ints[2] = {g.nr, g.nz};
  const double reals[3] = {g.r_max, g.z_min, g.z_max};
  out.write(reinterpret_cast<const char*>(ints), sizeof ints);
  out.write(reinterpret_cast<const char*>(reals), sizeof reals);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

ScalarFieldRZ read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot " + path.string());
  std::int64_t ints[2];
  double reals[3];
  in.read(reinterpret_cast<char*>(ints), sizeof ints);
  in.read(reinterpret_cast<char*>(reals), sizeof reals);
  if (!in) throw IoError("truncated snapshot header in " + path.string());
  if (ints[0] < 8 || ints[1] < 8 || ints[0] > (1 << 20) || ints[1] > (1 << 20))
    throw IoError("corrupt snapshot header in " + path.string());
  GridSpec g{static_cast<int>(ints[0]), static_cast<int>(ints[1]), reals[0], reals[1], reals[2]};
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw IoError("corrupt snapshot header in " + path.string() + ": " + e.what());
  }
  ScalarFieldRZ f(g);
  in.read(reinterpret_cast<char*>(f.values().data()),
          static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!in) throw IoError("truncated snapshot data in " + path.string());
  if (in.peek() != std::char_traits<char>::eof())
    throw IoError("trailing bytes in snapshot " + path.string());
  return f;
}

void write_csv(const ScalarFieldRZ& f, std::ostream& out) {
  const auto& g = f.grid();
  out << "r,z,value\n" << std::setprecision(17);
  for (int i = 0; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) out << g.r(i) << ',' << g.z(j) << ',' << f(i, j) << '\n';
}

}  // namespace ringlab
