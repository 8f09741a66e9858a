#pragma once

// Machine-checkable ratios for the inequalities, conservation laws and limit
// statements audited on simulation snapshots.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ringlab/biot_savart.hpp"
#include "ringlab/evolve.hpp"
#include "ringlab/fields.hpp"

namespace ringlab {

struct ReportContext {
  double t = 0.0;
  double eps = 0.0;
  double kappa = 0.0;
  double r0 = 0.0;
  std::uint64_t grid_hash = 0;
};

struct EstimateReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double threshold = 0.0;
  bool pass = true;
  ReportContext context;
};

/// Fills ratio (0 when lhs == 0) and pass = ratio <= threshold.
EstimateReport make_report(std::string name, double lhs, double rhs, double threshold,
                           const ReportContext& context = {});

/// One JSON object per line.
void write_report_jsonl(std::ostream& out, const EstimateReport& report);

/// Frozen empirical constants, keyed by report name.
class Calibration {
 public:
  /// Values calibrated over the published family (configs/calibration.json).
  static const Calibration& builtin();
  /// Loads {"constants": {name: value, ...}} from a JSON file.
  static Calibration load(const std::string& path);

  double at(const std::string& name) const;
  const std::map<std::string, double>& constants() const noexcept { return constants_; }
  void set(const std::string& name, double value) { constants_[name] = value; }

 private:
  std::map<std::string, double> constants_;
};

/// Slack on the constant-1 interpolation inequality.
inline constexpr double kInterpolationSlack = 1e-6;

/// ||f||_p <= ||r f||_1^{1/2} ||f/r||_1^{1/p-1/2} ||f/r||_inf^{1-1/p}, p in [1, 2].
/// f must vanish on the axis row.
EstimateReport check_interpolation(const ScalarFieldRZ& f, double p, const ReportContext& ctx = {});

/// Same inequality for f = r eta, with f/r taken as eta itself.
EstimateReport check_interpolation_eta(const ScalarFieldRZ& eta, double p,
                                       const ReportContext& ctx = {});

/// ||u||_q against ||r omega||_1^{1/2} ||omega/r||_1^{1/q-1/6} ||omega/r||_inf^{2/3-1/q},
/// omega = r eta, q in (3/2, 6].
EstimateReport check_velocity_lq(const ScalarFieldRZ& eta, const VelocityFieldRZ& u, double q,
                                 const ReportContext& ctx = {},
                                 const Calibration& cal = Calibration::builtin());

/// ||u||_inf against ||r^2 omega||^{1/4} ||omega||^{1/4} ||omega/r||_inf^{1/2} in plane norms.
EstimateReport check_velocity_sup(const ScalarFieldRZ& eta, const VelocityFieldRZ& u,
                                  const ReportContext& ctx = {},
                                  const Calibration& cal = Calibration::builtin());

/// The u_r and u_z parts of check_velocity_sup, each against its own constant.
std::pair<EstimateReport, EstimateReport> check_velocity_sup_components(
    const ScalarFieldRZ& eta, const VelocityFieldRZ& u, const ReportContext& ctx = {},
    const Calibration& cal = Calibration::builtin());

/// Centred-difference gradient (f_r, f_z); one-sided on the outer edges, f_r = 0 on the axis.
std::pair<ScalarFieldRZ, ScalarFieldRZ> gradient(const ScalarFieldRZ& f);

/// ||f||_inf against ||r grad f||_1^{1/4} ||grad f / r||_1^{1/4} ||grad f / r||_inf^{1/2}.
/// Throws DomainError if |f| exceeds 1e-8 ||f||_inf on an outer edge.
EstimateReport check_scalar_sup(const ScalarFieldRZ& f,
                                const std::pair<ScalarFieldRZ, ScalarFieldRZ>& grad,
                                const ReportContext& ctx = {},
                                const Calibration& cal = Calibration::builtin());

/// Radius of the smallest origin-centred ball holding every node with eta != 0.
double support_radius(const ScalarFieldRZ& eta);

/// Far-field bound at |x| = radius on `rays` directions in the upper half
/// plane, with u from velocity_direct. One report per radius; ratio is the
/// worst |u| / (bound (1 + slack)).
std::vector<EstimateReport> check_far_field(const ScalarFieldRZ& eta, std::span<const double> radii,
                                            int rays = 9, double slack = 1e-3,
                                            const ReportContext& ctx = {});

/// Log-log slope of |u(r, z_ref)| along r in [r_a, r_b]; report-only.
EstimateReport radial_decay_exponent(const ScalarFieldRZ& eta, double z_ref, double r_a, double r_b,
                                     const ReportContext& ctx = {});

struct DiagnosticRecord {
  double t = 0.0;
  long long steps = 0;
  std::map<std::string, double> values;
  std::vector<EstimateReport> reports;
};

class DiagnosticsSeries {
 public:
  /// Throws StateError unless t exceeds the last recorded time.
  void append(DiagnosticRecord record);

  const std::vector<DiagnosticRecord>& records() const noexcept { return records_; }
  std::vector<double> times() const;
  /// Values of one quantity over all records.
  std::vector<double> series(const std::string& quantity) const;
  bool all_pass() const;

  /// Header plus one row per record: t, steps, quantities, then
  /// <report>_ratio and <report>_pass columns.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<DiagnosticRecord> records_;
};

/// Quantity names stored in every record.
const std::vector<std::string>& diagnostic_quantities();

/// All norms, moments and reports of one synchronised (eta, u) pair.
DiagnosticRecord diagnose(double t, long long steps, const ScalarFieldRZ& eta,
                          const VelocityFieldRZ& u, const ReportContext& ctx,
                          const Calibration& cal = Calibration::builtin());

struct DecayFit {
  double slope = 0.0;
  double envelope_max = 0.0;  ///< max of t^{(3/2)(1-1/p)} q(t); 0 for non-norm quantities
  int samples = 0;            ///< after trimming
};

/// Least-squares slope of log q against log t over [t_a, t_b], first and last
/// 10% of the samples trimmed. Needs >= 8 samples in the window.
DecayFit fit_decay(const DiagnosticsSeries& series, const std::string& quantity, double t_a,
                   double t_b);
DecayFit fit_decay(std::span<const double> t, std::span<const double> q, double t_a, double t_b,
                   double envelope_exponent);

/// Lebesgue exponent of a norm quantity ("eta_l2" -> 2, "eta_linf" -> inf), 0 if none.
double norm_exponent(const std::string& quantity);

/// Smooth bump exp(-1 / (1 - rho^2)), rho = |(r, z) - center| / radius; 0 outside.
double test_bump(double r, double z, std::pair<double, double> center, double radius);

/// 2 pi \int omega_theta phi_theta r dr dz for omega = r eta.
double attainment_pairing(const ScalarFieldRZ& eta, const std::function<double(double, double)>& phi);

struct AttainmentRun {
  RingSpec ring;
  std::vector<Snapshot> snapshots;
};

struct AttainmentRow {
  double eps = 0.0;
  double t = 0.0;
  double error = 0.0;  ///< E(eps, t)
};

struct AttainmentResult {
  std::vector<AttainmentRow> rows;
  std::vector<double> eps;       ///< distinct eps, decreasing
  std::vector<double> diagonal;  ///< E(eps, eps^2), same order as eps
  bool diagonal_decreasing = false;
  double envelope_a = 0.0;       ///< fitted on the largest-eps run
  double envelope_b = 0.0;
  double worst_envelope_ratio = 0.0;  ///< max E / (A T^{1/2} + B T^{3/4}) over the other runs
  bool dominated = false;
};

/// Throws ConfigError unless phi vanishes on the outer edges of the grid.
void check_test_field_support(const GridSpec& grid, const std::function<double(double, double)>& phi);

/// E(eps, t) = |pairing(eta, phi) - 2 pi kappa r0 phi(r0, z0)|.
AttainmentRow attainment_row(const RingSpec& ring, double t, const ScalarFieldRZ& eta,
                             const std::function<double(double, double)>& phi);

/// Groups rows by eps; diagonal at t = eps^2 (required for every eps),
/// envelope fitted on the largest eps and checked on the rest.
AttainmentResult summarize_attainment(std::span<const AttainmentRow> rows, double slack = 0.1);

/// E(eps, t) = |pairing - 2 pi kappa r0 phi(r0, z0)| for every snapshot with
/// t <= t_max; diagonal needs a snapshot at t = eps^2 in each run. The
/// envelope is the least upper bound of the form A T^{1/2} + B T^{3/4}
/// (A, B >= 0) on the largest-eps run, checked on the others with `slack`.
AttainmentResult check_initial_attainment(std::span<const AttainmentRun> runs,
                                          const std::function<double(double, double)>& phi,
                                          double t_max = 0.5, double slack = 0.1);

/// Smallest A, B >= 0 (minimising sum of envelope values) with
/// A sqrt(T_k) + B T_k^{3/4} >= E_k for all k.
std::pair<double, double> fit_upper_envelope(std::span<const double> t, std::span<const double> e);

}  // namespace ringlab
