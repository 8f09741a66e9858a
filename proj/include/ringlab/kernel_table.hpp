#pragma once

// Fast evaluation of F and F' for the O(N^2) quadrature loops. Piecewise
// Chebyshev interpolation in u = log s on [s_lo, s_hi], the log series below
// and the convergent large-s binomial series above.

#include <vector>

#include "ringlab/kernel.hpp"

namespace ringlab {

struct KernelPair {
  double f;
  double df;
};

class KernelTable {
 public:
  static constexpr double kSLo = 1e-12;
  static constexpr double kSHi = 1e3;

  explicit KernelTable(const Kernel& kernel = default_kernel(), double piece_width = 0.5,
                       int degree = 16);

  /// Shared instance built from default_kernel() on first use.
  static const KernelTable& instance();

  KernelPair eval(double s) const;
  double f(double s) const { return eval(s).f; }
  double df(double s) const { return eval(s).df; }

 private:
  double u_lo_;
  double width_;
  int pieces_;
  int degree_;
  std::vector<double> coef_f_;   // pieces_ x (degree_ + 1)
  std::vector<double> coef_sf_;  // coefficients of s F'(s)
};

/// (F, F') from the large-s series sum_n binom(-1/2, n) a_n s^{-1/2-n}; s > 16.
KernelPair kernel_large_s_series(double s);

}  // namespace ringlab
