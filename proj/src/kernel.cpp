#include "ringlab/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ringlab/error.hpp"
#include "ringlab/quadrature.hpp"

namespace ringlab {
namespace {

constexpr double kPi = std::numbers::pi;

// F^{(k)}(s) = c_k \int cos(phi) (x + s)^{-m} dphi with m = k + 1/2.
constexpr std::array<double, 3> kDerivPrefactor = {1.0, -0.5, 0.75};

void check_order(int k) {
  if (k < 0 || k > 2) throw DomainError("kernel derivative order must be 0, 1 or 2");
}

void check_argument(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream msg;
    msg << "F is defined for finite s > 0, got s = " << s;
    throw DomainError(msg.str());
  }
}

// 2 (1 - cos phi), without cancellation near phi = 0.
inline double chord2(double phi) {
  const double h = std::sin(0.5 * phi);
  return 4.0 * h * h;
}

// v^{-m} for m = k + 1/2.
inline double inv_pow_half(double v, int k) {
  const double root = std::sqrt(v);
  switch (k) {
    case 0: return 1.0 / root;
    case 1: return 1.0 / (v * root);
    default: return 1.0 / (v * v * root);
  }
}

// \int_0^\pi (phi^2 + s)^{-m} dphi in closed form.
double peak_integral(double s, int k) {
  const double pi2s = kPi * kPi + s;
  switch (k) {
    case 0: return std::asinh(kPi / std::sqrt(s));
    case 1: return kPi / (s * std::sqrt(pi2s));
    default: return kPi * (2.0 * kPi * kPi + 3.0 * s) / (3.0 * s * s * pi2s * std::sqrt(pi2s));
  }
}

// (1 + y)^{-m} - 1 + m y, evaluated as (q - 1)^2 P_m(q) / (2 q^{2m}), q = sqrt(1 + y).
double binomial_remainder(double y, int k) {
  const double q = std::sqrt(1.0 + y);
  const double qm1 = y / (q + 1.0);
  switch (k) {
    case 0: return qm1 * qm1 * (q + 2.0) / (2.0 * q);
    case 1: {
      const double p = ((3.0 * q + 6.0) * q + 4.0) * q + 2.0;
      return qm1 * qm1 * p / (2.0 * q * q * q);
    }
    default: {
      const double p = ((((5.0 * q + 10.0) * q + 8.0) * q + 6.0) * q + 4.0) * q + 2.0;
      const double q2 = q * q;
      return qm1 * qm1 * p / (2.0 * q2 * q2 * q);
    }
  }
}

// Coefficient bound used for the series truncation estimate; the observed
// ratio (F - series) / (s log(1/s)) stays below 0.17 on (0, 0.05].
constexpr double kSeriesRemainderBound = 0.2;

}  // namespace

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::kSeries: return "series";
    case Regime::kLogQuadrature: return "log-quadrature";
    case Regime::kQuadrature: return "quadrature";
    case Regime::kAsymptotic: return "asymptotic";
  }
  return "unknown";
}

double kernel_scale(double s, int k) {
  return s <= 1.0 ? std::pow(s, -k) : std::pow(s, -k - 1.5);
}

void KernelConfig::validate() const {
  if (!(s_small > 0.0 && s_small < 1.0 && s_large > 1.0))
    throw ConfigError("kernel switch points must satisfy 0 < s_small < 1 < s_large");
  if (!(quad_abs_tol > 0.0) || !(quad_rel_tol > 0.0))
    throw ConfigError("kernel quadrature tolerances must be positive");
  if (quad_max_subdiv < 1) throw ConfigError("quad_max_subdiv must be positive");
}

Kernel::Kernel(KernelConfig config) : config_(config) { config_.validate(); }

KernelValue Kernel::derivative(double s, int k) const {
  check_order(k);
  check_argument(s);
  if (s <= config_.s_small) return derivative_in(s, k, Regime::kSeries);
  if (s >= config_.s_large) return derivative_in(s, k, Regime::kAsymptotic);
  return derivative_in(s, k, Regime::kQuadrature);
}

KernelValue Kernel::derivative_in(double s, int k, Regime regime) const {
  check_order(k);
  check_argument(s);
  const double c = kDerivPrefactor[static_cast<std::size_t>(k)];
  const double scale = kernel_scale(s, k);
  const double abs_tol = config_.quad_abs_tol * scale / std::abs(c);
  const double rs = std::sqrt(s);

  auto finish = [&](const QuadratureResult& q, double value, double error, Regime tag) {
    if (!q.converged) {
      std::ostringstream msg;
      msg << "F^(" << k << ") quadrature did not converge at s = " << s << " (error estimate "
          << q.error << " after " << q.intervals << " intervals)";
      throw EvaluationError(msg.str(), q.error);
    }
    return KernelValue{value, error, tag};
  };

  if (regime == Regime::kSeries) {
    const double log_inv = std::log(1.0 / s);
    double series = 0.0, estimate = 0.0;
    switch (k) {
      case 0:
        series = 0.5 * log_inv + std::log(8.0) - 2.0;
        estimate = kSeriesRemainderBound * s * (log_inv + 2.0);
        break;
      case 1:
        series = -0.5 / s;
        estimate = kSeriesRemainderBound * (log_inv + 2.0);
        break;
      default:
        series = 0.5 / (s * s);
        estimate = kSeriesRemainderBound * (1.0 + 1.0 / s);
        break;
    }
    if (estimate <= config_.quad_abs_tol * scale) return {series, estimate, Regime::kSeries};
    regime = Regime::kLogQuadrature;
  }

  if (regime == Regime::kLogQuadrature) {
    auto integrand = [k](double phi, double s_) {
      return std::cos(phi) * inv_pow_half(chord2(phi) + s_, k) - inv_pow_half(phi * phi + s_, k);
    };
    auto f = [&](double phi) { return integrand(phi, s); };
    const std::array<double, 2> breaks = {rs, 10.0 * rs};
    const auto q = integrate_adaptive(f, 0.0, kPi, abs_tol, config_.quad_rel_tol,
                                      config_.quad_max_subdiv, breaks);
    return finish(q, c * (peak_integral(s, k) + q.value), std::abs(c) * q.error,
                  Regime::kLogQuadrature);
  }

  if (regime == Regime::kAsymptotic) {
    // F^{(k)} = c s^{-m-1} [ m pi + s \int cos(phi) R_m(x / s) dphi ].
    const double m = k + 0.5;
    auto f = [&](double phi) { return s * std::cos(phi) * binomial_remainder(chord2(phi) / s, k); };
    const auto q = integrate_adaptive(f, 0.0, kPi, config_.quad_abs_tol, config_.quad_rel_tol,
                                      config_.quad_max_subdiv);
    const double pre = c * std::pow(s, -m - 1.0);
    return finish(q, pre * (m * kPi + q.value), std::abs(pre) * q.error, Regime::kAsymptotic);
  }

  auto f = [&](double phi) { return std::cos(phi) * inv_pow_half(chord2(phi) + s, k); };
  const std::array<double, 1> breaks = {rs};
  const auto q = integrate_adaptive(f, 0.0, kPi, abs_tol, config_.quad_rel_tol,
                                    config_.quad_max_subdiv, breaks);
  return finish(q, c * q.value, std::abs(c) * q.error, Regime::kQuadrature);
}

double Kernel::regime_continuity_defect() const {
  double worst = 0.0;
  for (int k = 0; k <= 2; ++k) {
    for (auto [s, lo, hi] : {std::tuple{config_.s_small, Regime::kSeries, Regime::kQuadrature},
                             std::tuple{config_.s_large, Regime::kQuadrature, Regime::kAsymptotic}}) {
      const double a = derivative_in(s, k, lo).value;
      const double b = derivative_in(s, k, hi).value;
      worst = std::max(worst, std::abs(a - b) / (config_.quad_abs_tol * kernel_scale(s, k)));
    }
  }
  return worst;
}

const Kernel& default_kernel() {
  static const Kernel kernel{};
  return kernel;
}

double f_eval(double s) { return default_kernel().f(s).value; }

double f_deriv(double s, int k) {
  if (k != 1 && k != 2) throw DomainError("f_deriv supports k = 1 or k = 2");
  return default_kernel().derivative(s, k).value;
}

namespace {

struct KernelArgs {
  double xi2;
  double root_rr;
};

KernelArgs kernel_args(double r_bar, double z_bar, double r, double z) {
  if (!(r > 0.0) || !(r_bar > 0.0))
    throw DomainError("axisymmetric kernels need r > 0 and r_bar > 0");
  const double dr = r - r_bar;
  const double dz = z - z_bar;
  const double d2 = dr * dr + dz * dz;
  if (d2 == 0.0) throw SingularityError("kernel evaluated at coincident points");
  return {d2 / (r_bar * r), std::sqrt(r_bar * r)};
}

}  // namespace

double kernel_g(double r_bar, double z_bar, double r, double z) {
  const auto a = kernel_args(r_bar, z_bar, r, z);
  return a.root_rr / (2.0 * kPi) * f_eval(a.xi2);
}

double kernel_ur(double r_bar, double z_bar, double r, double z) {
  const auto a = kernel_args(r_bar, z_bar, r, z);
  return (z - z_bar) / (kPi * r_bar * std::sqrt(r_bar * r)) * f_deriv(a.xi2, 1);
}

double kernel_uz(double r_bar, double z_bar, double r, double z) {
  const auto a = kernel_args(r_bar, z_bar, r, z);
  const double f0 = f_eval(a.xi2);
  const double f1 = f_deriv(a.xi2, 1);
  const double rb32 = r_bar * std::sqrt(r_bar);
  return (r_bar - r) / (kPi * rb32 * std::sqrt(r)) * f1 +
         (f0 - 2.0 * a.xi2 * f1) * std::sqrt(r) / (4.0 * kPi * rb32);
}

void write_kernel_table(std::ostream& out, double s_lo, double s_hi, int count,
                        const Kernel& kernel) {
  if (!(s_lo > 0.0) || !(s_hi >= s_lo) || !std::isfinite(s_hi))
    throw DomainError("kernel table needs 0 < s_lo <= s_hi");
  if (count < 1) throw DomainError("kernel table needs count >= 1");
  out << "s,F,dF,regime,error\n";
  out << std::setprecision(17);
  const double ratio = count > 1 ? std::log(s_hi / s_lo) / (count - 1) : 0.0;
  for (int i = 0; i < count; ++i) {
    const double s = i + 1 == count ? s_hi : s_lo * std::exp(ratio * i);
    const auto v0 = kernel.f(s);
    const auto v1 = kernel.derivative(s, 1);
    out << s << ',' << v0.value << ',' << v1.value << ',' << regime_name(v0.regime) << ','
        << std::max(v0.error, v1.error) << '\n';
  }
}

}  // namespace ringlab
