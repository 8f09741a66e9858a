#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace ringlab {

/// Uniform node grid r_i = i dr (i = 0..nr), z_j = z_min + j dz (j = 0..nz).
struct GridSpec {
  int nr = 0;
  int nz = 0;
  double r_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;

  double dr() const noexcept { return r_max / nr; }
  double dz() const noexcept { return (z_max - z_min) / nz; }
  double r(int i) const noexcept { return i * dr(); }
  double z(int j) const noexcept { return z_min + j * dz(); }
  int rows() const noexcept { return nr + 1; }
  int cols() const noexcept { return nz + 1; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(nr + 1) * static_cast<std::size_t>(nz + 1);
  }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(nz + 1) +
           static_cast<std::size_t>(j);
  }

  /// Throws ConfigError unless nr, nz >= 8, r_max > 0 and z_min < z_max.
  void validate() const;

  /// Same domain with every cell split in `factor` along both axes.
  GridSpec refined(int factor) const;

  /// Stable 64-bit FNV-1a digest of the layout.
  std::uint64_t hash() const;

  bool operator==(const GridSpec&) const = default;
};

/// Node values of one axisymmetric scalar, r-major.
class ScalarFieldRZ {
 public:
  ScalarFieldRZ() = default;
  explicit ScalarFieldRZ(const GridSpec& grid, double fill = 0.0);

  const GridSpec& grid() const noexcept { return grid_; }
  double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool all_finite() const;
  double max_abs() const;
  double min_value() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Binary snapshot: int64 nr, nz; float64 r_max, z_min, z_max; values.
/// Little-endian.
void write_binary(const ScalarFieldRZ& f, const std::filesystem::path& path);
ScalarFieldRZ read_binary(const std::filesystem::path& path);

/// CSV with columns r, z, value.
void write_csv(const ScalarFieldRZ& f, std::ostream& out);

}  // namespace ringlab
