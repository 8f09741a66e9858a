#include "ringlab/kernel_table.hpp"

#include <cmath>
#include <numbers>

#include "ringlab/error.hpp"

namespace ringlab {
namespace {

constexpr double kPi = std::numbers::pi;

double clenshaw(const double* c, int degree, double x) {
  double b1 = 0.0, b2 = 0.0;
  const double x2 = 2.0 * x;
  for (int k = degree; k >= 1; --k) {
    const double t = x2 * b1 - b2 + c[k];
    b2 = b1;
    b1 = t;
  }
  return x * b1 - b2 + c[0];
}

}  // namespace

KernelPair kernel_large_s_series(double s) {
  if (!(s > 16.0)) throw DomainError("large-s series needs s > 16");
  // a_n = \int_0^pi cos(phi) (2 - 2 cos phi)^n dphi = -pi C(2n, n-1).
  double f = 0.0, df = 0.0;
  double binom_half = 1.0;  // binom(-1/2, n)
  double central = 1.0;     // C(2n, n - 1)
  const double inv = 1.0 / s;
  double power = std::sqrt(inv);  // s^{-1/2-n}
  for (int n = 1; n <= 60; ++n) {
    binom_half *= (-0.5 - (n - 1)) / n;
    central = n == 1 ? 1.0 : central * (2.0 * n) * (2.0 * n - 1.0) / ((n + 1.0) * (n - 1.0));
    power *= inv;
    const double term = binom_half * (-kPi * central) * power;
    f += term;
    df += -(0.5 + n) * term * inv;
    if (std::abs(term) <= 1e-18 * std::abs(f)) break;
  }
  return {f, df};
}

KernelTable::KernelTable(const Kernel& kernel, double piece_width, int degree)
    : u_lo_(std::log(kSLo)), width_(piece_width), degree_(degree) {
  if (!(piece_width > 0.0) || degree < 2) throw ConfigError("invalid kernel table layout");
  pieces_ = static_cast<int>(std::ceil((std::log(kSHi) - u_lo_) / width_));
  const int n = degree_ + 1;
  coef_f_.assign(static_cast<std::size_t>(pieces_ * n), 0.0);
  coef_sf_.assign(coef_f_.size(), 0.0);
  std::vector<double> vf(n), vsf(n);
  for (int p = 0; p < pieces_; ++p) {
    const double a = u_lo_ + p * width_;
    for (int j = 0; j < n; ++j) {
      const double x = std::cos(kPi * (j + 0.5) / n);
      const double s = std::exp(a + 0.5 * width_ * (x + 1.0));
      vf[j] = kernel.derivative(s, 0).value;
      vsf[j] = s * kernel.derivative(s, 1).value;
    }
    for (int k = 0; k < n; ++k) {
      double cf = 0.0, csf = 0.0;
      for (int j = 0; j < n; ++j) {
        const double w = std::cos(kPi * k * (j + 0.5) / n);
        cf += vf[j] * w;
        csf += vsf[j] * w;
      }
      const double scale = (k == 0 ? 1.0 : 2.0) / n;
      coef_f_[static_cast<std::size_t>(p * n + k)] = scale * cf;
      coef_sf_[static_cast<std::size_t>(p * n + k)] = scale * csf;
    }
  }
}

const KernelTable& KernelTable::instance() {
  static const KernelTable table{};
  return table;
}

KernelPair KernelTable::eval(double s) const {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("kernel table needs finite s > 0");
  if (s < kSLo) {
    return {0.5 * std::log(1.0 / s) + std::log(8.0) - 2.0, -0.5 / s};
  }
  if (s >= kSHi) return kernel_large_s_series(s);
  const double u = std::log(s);
  int p = static_cast<int>((u - u_lo_) / width_);
  if (p >= pieces_) p = pieces_ - 1;
  if (p < 0) p = 0;
  const double x = 2.0 * (u - u_lo_ - p * width_) / width_ - 1.0;
  const std::size_t off = static_cast<std::size_t>(p * (degree_ + 1));
  return {clenshaw(&coef_f_[off], degree_, x), clenshaw(&coef_sf_[off], degree_, x) / s};
}

}  // namespace ringlab
