#pragma once

// The axisymmetric Biot-Savart special function
//
//   F(s) = \int_0^\pi cos(phi) / sqrt(2 (1 - cos phi) + s) dphi,   s > 0,
//
// its first two derivatives, and the stream-function / velocity kernels
// built from it. Evaluation is piecewise:
//
//   s <= s_small   log series  1/2 log(1/s) + log 8 - 2, or, when its
//                  truncation estimate exceeds the tolerance, quadrature of
//                  the integrand with the 1/sqrt(phi^2 + s) peak removed
//                  analytically;
//   otherwise      adaptive Gauss-Kronrod on the raw integrand;
//   s >= s_large   leading term (pi/2) s^{-3/2} plus quadrature of the
//                  binomial remainder.

#include <iosfwd>
#include <string_view>

namespace ringlab {

struct KernelConfig {
  double s_small = 0.05;
  double s_large = 50.0;
  double quad_abs_tol = 1e-12;  ///< applied to the scale-normalised value
  double quad_rel_tol = 1e-13;
  int quad_max_subdiv = 400;

  /// Throws ConfigError unless 0 < s_small < 1 < s_large and tolerances are positive.
  void validate() const;
};

enum class Regime { kSeries, kLogQuadrature, kQuadrature, kAsymptotic };

std::string_view regime_name(Regime r);

struct KernelValue {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  Regime regime = Regime::kQuadrature;
};

/// Characteristic magnitude of F^{(k)}(s): s^{-k} below 1, s^{-k-3/2} above.
double kernel_scale(double s, int k);

class Kernel {
 public:
  explicit Kernel(KernelConfig config = {});

  const KernelConfig& config() const noexcept { return config_; }

  /// F(s). Throws DomainError for s <= 0, EvaluationError on non-convergence.
  KernelValue f(double s) const { return derivative(s, 0); }

  /// F^{(k)}(s) for k in {0, 1, 2}.
  KernelValue derivative(double s, int k) const;

  /// Same, with the evaluation strategy forced. kSeries falls back to
  /// kLogQuadrature when the series is not accurate enough at s.
  KernelValue derivative_in(double s, int k, Regime regime) const;

  /// Largest disagreement between the two strategies meeting at s_small and
  /// at s_large, in units of the normalised tolerance. Values <= 10 mean the
  /// regime switch is seamless.
  double regime_continuity_defect() const;

 private:
  KernelConfig config_;
};

/// Process-wide kernel with the default configuration.
const Kernel& default_kernel();

double f_eval(double s);
double f_deriv(double s, int k);

/// Stream-function kernel G(r', z', r, z) = sqrt(r' r) / (2 pi) F(xi^2),
/// xi^2 = ((r - r')^2 + (z - z')^2) / (r' r).
double kernel_g(double r_bar, double z_bar, double r, double z);

/// u_r weight: (z - z') / (pi r'^{3/2} sqrt r) F'(xi^2).
double kernel_ur(double r_bar, double z_bar, double r, double z);

/// u_z weight (1/r') dG/dr'.
double kernel_uz(double r_bar, double z_bar, double r, double z);

/// CSV tabulation on `count` log-spaced points of [s_lo, s_hi]:
/// columns s, F, F', regime, error.
void write_kernel_table(std::ostream& out, double s_lo, double s_hi, int count,
                        const Kernel& kernel = default_kernel());

}  // namespace ringlab
