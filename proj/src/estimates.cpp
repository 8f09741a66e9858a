#include "ringlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ringlab/error.hpp"

namespace ringlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_p(double p) {
  std::ostringstream s;
  s << std::setprecision(4) << p;
  return s.str();
}

}  // namespace

EstimateReport make_report(std::string name, double lhs, double rhs, double threshold,
                           const ReportContext& context) {
  EstimateReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.threshold = threshold;
  r.context = context;
  if (lhs == 0.0) r.ratio = 0.0;
  else if (rhs == 0.0) r.ratio = kInf;
  else r.ratio = lhs / rhs;
  r.pass = r.ratio <= threshold;
  return r;
}

void write_report_jsonl(std::ostream& out, const EstimateReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  };
  nlohmann::json j{{"name", r.name},
                   {"lhs", num(r.lhs)},
                   {"rhs", num(r.rhs)},
                   {"ratio", num(r.ratio)},
                   {"threshold", num(r.threshold)},
                   {"pass", r.pass},
                   {"t", r.context.t},
                   {"eps", r.context.eps},
                   {"kappa", r.context.kappa},
                   {"r0", r.context.r0},
                   {"grid_hash", r.context.grid_hash}};
  out << j.dump() << '\n';
}

const Calibration& Calibration::builtin() {
  static const Calibration cal = [] {
    Calibration c;
    // Keep in sync with configs/calibration.json.
    c.constants_ = {
        {"velocity_l2", 0.25},      {"velocity_l4", 0.19},      {"velocity_l6", 0.20},
        {"velocity_sup", 0.54},     {"velocity_sup_ur", 0.28},  {"velocity_sup_uz", 0.54},
        {"scalar_sup", 0.24},
    };
    return c;
  }();
  return cal;
}

Calibration Calibration::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed calibration file " + path + ": " + e.what());
  }
  if (!j.contains("constants") || !j["constants"].is_object())
    throw IoError("calibration file " + path + " has no \"constants\" object");
  Calibration c;
  for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it) {
    if (!it.value().is_number()) throw IoError("calibration constant " + it.key() + " is not a number");
    c.constants_[it.key()] = it.value().get<double>();
  }
  return c;
}

double Calibration::at(const std::string& name) const {
  auto it = constants_.find(name);
  if (it == constants_.end()) throw ConfigError("no calibrated constant named " + name);
  return it->second;
}

EstimateReport check_interpolation(const ScalarFieldRZ& f, double p, const ReportContext& ctx) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("interpolation check needs 1 <= p <= 2");
  const auto& g = f.grid();
  double sup_over_r = 0.0;
  for (int j = 0; j <= g.nz; ++j)
    if (f(0, j) != 0.0) throw DomainError("interpolation check needs f = 0 on the axis");
  for (int i = 1; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) sup_over_r = std::max(sup_over_r, std::abs(f(i, j)) / g.r(i));
  const double lhs = norm_lp_3d(f, p);
  const double rhs = std::sqrt(weighted_moment(f, 1.0)) *
                     std::pow(weighted_moment(f, -1.0), 1.0 / p - 0.5) *
                     std::pow(sup_over_r, 1.0 - 1.0 / p);
  return make_report("interpolation_p" + format_p(p), lhs, rhs, 1.0 + kInterpolationSlack, ctx);
}

EstimateReport check_interpolation_eta(const ScalarFieldRZ& eta, double p, const ReportContext& ctx) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("interpolation check needs 1 <= p <= 2");
  const double lhs = norm_lp_3d(omega_from_eta(eta), p);
  const double rhs = std::sqrt(weighted_moment(eta, 2.0)) *
                     std::pow(weighted_moment(eta, 0.0), 1.0 / p - 0.5) *
                     std::pow(eta.max_abs(), 1.0 - 1.0 / p);
  return make_report("interpolation_p" + format_p(p), lhs, rhs, 1.0 + kInterpolationSlack, ctx);
}

EstimateReport check_velocity_lq(const ScalarFieldRZ& eta, const VelocityFieldRZ& u, double q,
                                 const ReportContext& ctx, const Calibration& cal) {
  if (!(q > 1.5 && q <= 6.0)) throw DomainError("velocity L^q check needs 3/2 < q <= 6");
  if (!(u.grid() == eta.grid())) throw DomainError("eta and u live on different grids");
  const double lhs = norm_lp_3d(u.magnitude(), q);
  const double rhs = std::sqrt(weighted_moment(eta, 2.0)) *
                     std::pow(weighted_moment(eta, 0.0), 1.0 / q - 1.0 / 6.0) *
                     std::pow(eta.max_abs(), 2.0 / 3.0 - 1.0 / q);
  const std::string name = "velocity_l" + format_p(q);
  const auto& k = cal.constants();
  const double threshold = k.count(name) ? k.at(name) : kInf;
  return make_report(name, lhs, rhs, threshold, ctx);
}

namespace {

double sup_rhs(const ScalarFieldRZ& eta) {
  // Plane norms: ||r^2 omega||_{L^1(Omega)} = \int\int r^3 |eta| dr dz, etc.
  const double m2 = weighted_moment(eta, 2.0) / (2.0 * kPi);
  const double m0 = weighted_moment(eta, 0.0) / (2.0 * kPi);
  return std::pow(m2, 0.25) * std::pow(m0, 0.25) * std::sqrt(eta.max_abs());
}

}  // namespace

EstimateReport check_velocity_sup(const ScalarFieldRZ& eta, const VelocityFieldRZ& u,
                                  const ReportContext& ctx, const Calibration& cal) {
  if (!(u.grid() == eta.grid())) throw DomainError("eta and u live on different grids");
  return make_report("velocity_sup", u.sup(), sup_rhs(eta), cal.at("velocity_sup"), ctx);
}

std::pair<EstimateReport, EstimateReport> check_velocity_sup_components(
    const ScalarFieldRZ& eta, const VelocityFieldRZ& u, const ReportContext& ctx,
    const Calibration& cal) {
  if (!(u.grid() == eta.grid())) throw DomainError("eta and u live on different grids");
  const double rhs = sup_rhs(eta);
  return {make_report("velocity_sup_ur", u.ur.max_abs(), rhs, cal.at("velocity_sup_ur"), ctx),
          make_report("velocity_sup_uz", u.uz.max_abs(), rhs, cal.at("velocity_sup_uz"), ctx)};
}

std::pair<ScalarFieldRZ, ScalarFieldRZ> gradient(const ScalarFieldRZ& f) {
  const auto& g = f.grid();
  ScalarFieldRZ fr(g), fz(g);
  const double dr = g.dr(), dz = g.dz();
  for (int i = 0; i <= g.nr; ++i) {
    for (int j = 0; j <= g.nz; ++j) {
      if (i == 0) fr(i, j) = 0.0;
      else if (i == g.nr) fr(i, j) = (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) / (2.0 * dr);
      else fr(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2.0 * dr);
      if (j == 0) fz(i, j) = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * dz);
      else if (j == g.nz) fz(i, j) = (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * dz);
      else fz(i, j) = (f(i, j + 1) - f(i, j - 1)) / (2.0 * dz);
    }
  }
  return {std::move(fr), std::move(fz)};
}

EstimateReport check_scalar_sup(const ScalarFieldRZ& f,
                                const std::pair<ScalarFieldRZ, ScalarFieldRZ>& grad,
                                const ReportContext& ctx, const Calibration& cal) {
  const auto& g = f.grid();
  if (!(grad.first.grid() == g) || !(grad.second.grid() == g))
    throw DomainError("gradient lives on a different grid");
  const double sup = f.max_abs();
  const double edge_tol = 1e-8 * sup;
  auto check_edge = [&](double v) {
    if (std::abs(v) > edge_tol) throw DomainError("scalar sup check needs f decayed on the outer edges");
  };
  for (int i = 0; i <= g.nr; ++i) {
    check_edge(f(i, 0));
    check_edge(f(i, g.nz));
  }
  for (int j = 0; j <= g.nz; ++j) check_edge(f(g.nr, j));
  ScalarFieldRZ mag(g);
  for (std::size_t k = 0; k < mag.values().size(); ++k)
    mag.values()[k] = std::hypot(grad.first.values()[k], grad.second.values()[k]);
  double sup_over_r = 0.0;
  bool axis_gradient = false;
  for (int j = 0; j <= g.nz; ++j) axis_gradient = axis_gradient || mag(0, j) > 0.0;
  for (int i = 1; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) sup_over_r = std::max(sup_over_r, mag(i, j) / g.r(i));
  // A gradient that survives on the axis makes |grad f| / r unbounded.
  const double rhs = axis_gradient ? kInf
                                   : std::pow(weighted_moment(mag, 1.0), 0.25) *
                                         std::pow(weighted_moment(mag, -1.0), 0.25) *
                                         std::sqrt(sup_over_r);
  return make_report("scalar_sup", sup, rhs, cal.at("scalar_sup"), ctx);
}

double support_radius(const ScalarFieldRZ& eta) {
  const auto& g = eta.grid();
  double R = 0.0;
  for (int i = 0; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j)
      if (eta(i, j) != 0.0) R = std::max(R, std::hypot(g.r(i), g.z(j)));
  return R;
}

std::vector<EstimateReport> check_far_field(const ScalarFieldRZ& eta, std::span<const double> radii,
                                            int rays, double slack, const ReportContext& ctx) {
  if (rays < 1) throw DomainError("far-field check needs at least one ray");
  const double R = support_radius(eta);
  const auto omega = omega_from_eta(eta);
  const double m2 = weighted_moment(eta, 2.0) / (2.0 * kPi);
  const double m0 = weighted_moment(eta, 0.0) / (2.0 * kPi);
  std::vector<EstimateReport> out;
  for (double rad : radii) {
    if (!(rad > R)) {
      std::ostringstream msg;
      msg << "far-field probe |x| = " << rad << " is inside the support ball R = " << R;
      throw DomainError(msg.str());
    }
    std::vector<Point> pts;
    for (int k = 0; k < rays; ++k) {
      const double th = rays == 1 ? 0.5 * kPi : kPi * k / (rays - 1);
      pts.push_back({rad * std::sin(th), rad * std::cos(th)});
    }
    const auto u = velocity_direct(omega, pts);
    double worst = 0.0;
    for (const auto& v : u) worst = std::max(worst, std::hypot(v.ur, v.uz));
    const double bound = std::sqrt(m2 * m0) / (2.0 * (rad - R) * (rad - R));
    auto rep = make_report("far_field_r" + format_p(rad), worst, bound * (1.0 + slack), 1.0, ctx);
    out.push_back(rep);
  }
  return out;
}

EstimateReport radial_decay_exponent(const ScalarFieldRZ& eta, double z_ref, double r_a, double r_b,
                                     const ReportContext& ctx) {
  if (!(r_a > 0.0 && r_b > r_a)) throw DomainError("radial decay window needs 0 < r_a < r_b");
  const auto omega = omega_from_eta(eta);
  constexpr int kSamples = 12;
  std::vector<Point> pts;
  for (int k = 0; k < kSamples; ++k)
    pts.push_back({r_a * std::pow(r_b / r_a, static_cast<double>(k) / (kSamples - 1)), z_ref});
  const auto u = velocity_direct(omega, pts);
  std::vector<double> lx, ly;
  for (int k = 0; k < kSamples; ++k) {
    const double m = std::hypot(u[static_cast<std::size_t>(k)].ur, u[static_cast<std::size_t>(k)].uz);
    if (m > 0.0) {
      lx.push_back(std::log(pts[static_cast<std::size_t>(k)].r));
      ly.push_back(std::log(m));
    }
  }
  double slope = 0.0;
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sx += lx[k];
      sy += ly[k];
      sxx += lx[k] * lx[k];
      sxy += lx[k] * ly[k];
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  // Report-only: the exponent is recorded, never failed.
  EstimateReport r = make_report("radial_decay_exponent", -slope, 1.0, kInf, ctx);
  r.ratio = -slope;
  r.pass = true;
  return r;
}

// ---------------------------------------------------------------------------

void DiagnosticsSeries::append(DiagnosticRecord record) {
  if (!records_.empty() && !(record.t > records_.back().t))
    throw StateError("diagnostic times must be strictly increasing");
  records_.push_back(std::move(record));
}

std::vector<double> DiagnosticsSeries::times() const {
  std::vector<double> t;
  for (const auto& r : records_) t.push_back(r.t);
  return t;
}

std::vector<double> DiagnosticsSeries::series(const std::string& quantity) const {
  std::vector<double> v;
  for (const auto& r : records_) {
    auto it = r.values.find(quantity);
    if (it == r.values.end()) throw DomainError("unknown diagnostic quantity " + quantity);
    v.push_back(it->second);
  }
  return v;
}

bool DiagnosticsSeries::all_pass() const {
  for (const auto& r : records_)
    for (const auto& rep : r.reports)
      if (!rep.pass) return false;
  return true;
}

void DiagnosticsSeries::write_csv(std::ostream& out) const {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& r : records_)
    for (const auto& rep : r.reports)
      if (seen.insert(rep.name).second) names.push_back(rep.name);
  out << "t,steps";
  for (const auto& q : diagnostic_quantities()) out << ',' << q;
  for (const auto& n : names) out << ',' << n << "_ratio," << n << "_pass";
  out << '\n' << std::setprecision(17);
  for (const auto& r : records_) {
    out << r.t << ',' << r.steps;
    for (const auto& q : diagnostic_quantities()) {
      auto it = r.values.find(q);
      out << ',';
      if (it != r.values.end()) out << it->second;
    }
    for (const auto& n : names) {
      auto it = std::find_if(r.reports.begin(), r.reports.end(),
                             [&](const EstimateReport& e) { return e.name == n; });
      if (it == r.reports.end()) out << ",,";
      else out << ',' << it->ratio << ',' << (it->pass ? 1 : 0);
    }
    out << '\n';
  }
}

const std::vector<std::string>& diagnostic_quantities() {
  static const std::vector<std::string> names = {
      "eta_l1",   "eta_l2",   "eta_l4",   "eta_linf", "moment_m1",  "moment_0",   "moment_1",
      "moment_2", "u_l2",     "u_l4",     "u_l6",     "u_sup",      "momentum",   "centroid_r",
      "centroid_z"};
  return names;
}

DiagnosticRecord diagnose(double t, long long steps, const ScalarFieldRZ& eta,
                          const VelocityFieldRZ& u, const ReportContext& ctx, const Calibration& cal) {
  DiagnosticRecord rec;
  rec.t = t;
  rec.steps = steps;
  auto& v = rec.values;
  v["eta_l1"] = norm_lp_3d(eta, 1.0);
  v["eta_l2"] = norm_lp_3d(eta, 2.0);
  v["eta_l4"] = norm_lp_3d(eta, 4.0);
  v["eta_linf"] = eta.max_abs();
  v["moment_m1"] = weighted_moment(eta, -1.0);
  v["moment_0"] = weighted_moment(eta, 0.0);
  v["moment_1"] = weighted_moment(eta, 1.0);
  v["moment_2"] = weighted_moment(eta, 2.0);
  const auto mag = u.magnitude();
  v["u_l2"] = norm_lp_3d(mag, 2.0);
  v["u_l4"] = norm_lp_3d(mag, 4.0);
  v["u_l6"] = norm_lp_3d(mag, 6.0);
  v["u_sup"] = mag.max_abs();
  v["momentum"] = signed_momentum_z(eta);
  const auto c = centroid(eta);
  v["centroid_r"] = c.r;
  v["centroid_z"] = c.z;
  ReportContext here = ctx;
  here.t = t;
  here.grid_hash = eta.grid().hash();
  for (double p : {1.0, 4.0 / 3.0, 2.0}) rec.reports.push_back(check_interpolation_eta(eta, p, here));
  for (double q : {2.0, 4.0, 6.0}) rec.reports.push_back(check_velocity_lq(eta, u, q, here, cal));
  rec.reports.push_back(check_velocity_sup(eta, u, here, cal));
  auto [ur, uz] = check_velocity_sup_components(eta, u, here, cal);
  rec.reports.push_back(std::move(ur));
  rec.reports.push_back(std::move(uz));
  return rec;
}

double norm_exponent(const std::string& quantity) {
  if (quantity == "eta_linf" || quantity == "u_sup") return kInf;
  for (const char* prefix : {"eta_l", "u_l"}) {
    const std::string pre = prefix;
    if (quantity.rfind(pre, 0) == 0) {
      try {
        return std::stod(quantity.substr(pre.size()));
      } catch (const std::exception&) {
        return 0.0;
      }
    }
  }
  return 0.0;
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> q, double t_a, double t_b,
                   double envelope_exponent) {
  if (t.size() != q.size()) throw DomainError("fit_decay needs one value per time");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= t_a && t[k] <= t_b && t[k] > 0.0) idx.push_back(k);
  if (idx.empty()) throw DomainError("fit_decay window holds no samples");
  if (idx.size() < 8) throw DomainError("fit_decay needs at least 8 samples in the window");
  const std::size_t trim = idx.size() / 10;
  std::vector<std::size_t> use(idx.begin() + static_cast<std::ptrdiff_t>(trim),
                               idx.end() - static_cast<std::ptrdiff_t>(trim));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  DecayFit fit;
  for (std::size_t k : use) {
    if (!(q[k] > 0.0)) throw DomainError("fit_decay needs positive values");
    const double x = std::log(t[k]), y = std::log(q[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(use.size());
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.samples = static_cast<int>(use.size());
  if (envelope_exponent > 0.0)
    for (std::size_t k : idx) fit.envelope_max = std::max(fit.envelope_max, std::pow(t[k], envelope_exponent) * q[k]);
  return fit;
}

DecayFit fit_decay(const DiagnosticsSeries& series, const std::string& quantity, double t_a,
                   double t_b) {
  const auto t = series.times();
  const auto q = series.series(quantity);
  const double p = norm_exponent(quantity);
  const double exponent = p > 0.0 && quantity.rfind("eta_", 0) == 0
                              ? 1.5 * (1.0 - (std::isinf(p) ? 0.0 : 1.0 / p))
                              : 0.0;
  return fit_decay(t, q, t_a, t_b, exponent);
}

double test_bump(double r, double z, std::pair<double, double> center, double radius) {
  const double dr = (r - center.first) / radius, dz = (z - center.second) / radius;
  const double rho2 = dr * dr + dz * dz;
  return rho2 < 1.0 ? std::exp(-1.0 / (1.0 - rho2)) : 0.0;
}

double attainment_pairing(const ScalarFieldRZ& eta, const std::function<double(double, double)>& phi) {
  const auto& g = eta.grid();
  double total = 0.0;
  for (int i = 1; i <= g.nr; ++i) {
    double row = 0.0;
    for (int j = 0; j <= g.nz; ++j)
      if (eta(i, j) != 0.0) row += g.r(i) * eta(i, j) * phi(g.r(i), g.z(j));
    total += row * row_weight(g, i, 0.0);
  }
  return total * g.dz();
}

std::pair<double, double> fit_upper_envelope(std::span<const double> t, std::span<const double> e) {
  if (t.size() != e.size() || t.empty()) throw DomainError("envelope fit needs matching samples");
  std::vector<double> a, b;
  for (double s : t) {
    if (!(s > 0.0)) throw DomainError("envelope fit needs T > 0");
    a.push_back(std::sqrt(s));
    b.push_back(std::pow(s, 0.75));
  }
  double wa = 0.0, wb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    wa += a[k];
    wb += b[k];
  }
  auto feasible = [&](double A, double B) {
    if (A < 0.0 || B < 0.0) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (A * a[k] + B * b[k] < e[k] * (1.0 - 1e-12)) return false;
    return true;
  };
  double best = kInf, bestA = 0.0, bestB = 0.0;
  auto consider = [&](double A, double B) {
    if (!feasible(A, B)) return;
    const double cost = A * wa + B * wb;
    if (cost < best) {
      best = cost;
      bestA = A;
      bestB = B;
    }
  };
  double amax = 0.0, bmax = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    amax = std::max(amax, e[k] / a[k]);
    bmax = std::max(bmax, e[k] / b[k]);
  }
  consider(amax, 0.0);
  consider(0.0, bmax);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t l = k + 1; l < a.size(); ++l) {
      const double det = a[k] * b[l] - a[l] * b[k];
      if (std::abs(det) < 1e-300) continue;
      consider((e[k] * b[l] - e[l] * b[k]) / det, (a[k] * e[l] - a[l] * e[k]) / det);
    }
  return {bestA, bestB};
}

void check_test_field_support(const GridSpec& g, const std::function<double(double, double)>& phi) {
  for (int j = 0; j <= g.nz; ++j)
    if (phi(g.r_max, g.z(j)) != 0.0) throw ConfigError("test field support exceeds the grid");
  for (int i = 0; i <= g.nr; ++i)
    if (phi(g.r(i), g.z_min) != 0.0 || phi(g.r(i), g.z_max) != 0.0)
      throw ConfigError("test field support exceeds the grid");
}

AttainmentRow attainment_row(const RingSpec& ring, double t, const ScalarFieldRZ& eta,
                             const std::function<double(double, double)>& phi) {
  const double target = 2.0 * kPi * ring.kappa * ring.r0 * phi(ring.r0, ring.z0);
  return {ring.eps, t, std::abs(attainment_pairing(eta, phi) - target)};
}

AttainmentResult summarize_attainment(std::span<const AttainmentRow> rows, double slack) {
  if (rows.empty()) throw DomainError("attainment summary needs rows");
  AttainmentResult res;
  res.rows.assign(rows.begin(), rows.end());
  for (const auto& row : rows)
    if (std::find(res.eps.begin(), res.eps.end(), row.eps) == res.eps.end()) res.eps.push_back(row.eps);
  std::sort(res.eps.begin(), res.eps.end(), std::greater<>());
  for (double eps : res.eps) {
    double diag = -1.0;
    for (const auto& row : rows)
      if (row.eps == eps && std::abs(row.t - eps * eps) <= 1e-9 * std::max(1.0, row.t)) diag = row.error;
    if (diag < 0.0) {
      std::ostringstream msg;
      msg << "attainment rows for eps = " << eps << " lack t = eps^2";
      throw DomainError(msg.str());
    }
    res.diagonal.push_back(diag);
  }
  res.diagonal_decreasing = true;
  for (std::size_t k = 1; k < res.diagonal.size(); ++k)
    if (!(res.diagonal[k] < res.diagonal[k - 1])) res.diagonal_decreasing = false;

  const double widest = res.eps.front();
  std::vector<double> ts, es;
  for (const auto& row : rows)
    if (row.eps == widest && row.t > 0.0) {
      ts.push_back(row.t);
      es.push_back(row.error);
    }
  if (ts.empty()) throw DomainError("attainment envelope needs rows with T > 0");
  std::tie(res.envelope_a, res.envelope_b) = fit_upper_envelope(ts, es);
  res.worst_envelope_ratio = 0.0;
  for (const auto& row : rows) {
    if (row.eps == widest || !(row.t > 0.0)) continue;
    const double env = res.envelope_a * std::sqrt(row.t) + res.envelope_b * std::pow(row.t, 0.75);
    res.worst_envelope_ratio = std::max(res.worst_envelope_ratio, env > 0.0 ? row.error / env : kInf);
  }
  res.dominated = res.worst_envelope_ratio <= 1.0 + slack;
  return res;
}

AttainmentResult check_initial_attainment(std::span<const AttainmentRun> runs,
                                          const std::function<double(double, double)>& phi,
                                          double t_max, double slack) {
  if (runs.empty()) throw DomainError("attainment check needs at least one run");
  std::vector<AttainmentRow> rows;
  for (const auto& run : runs) {
    if (run.snapshots.empty()) throw DomainError("attainment run without snapshots");
    check_test_field_support(run.snapshots.front().eta.grid(), phi);
    for (const auto& s : run.snapshots)
      if (s.t <= t_max * (1.0 + 1e-12)) rows.push_back(attainment_row(run.ring, s.t, s.eta, phi));
  }
  return summarize_attainment(rows, slack);
}

}  // namespace ringlab
