#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ringlab/elliptic.hpp"
#include "ringlab/error.hpp"
#include "ringlab/estimates.hpp"

namespace {

using namespace ringlab;
namespace fs = std::filesystem;

const GridSpec kBase{128, 192, 5.0, -4.0, 4.0};

ScalarFieldRZ ring_eta(const GridSpec& g, double eps, double kappa = 1.0) {
  const RingSpec ring{kappa, 1.0, 0.0, eps};
  return make_mollified_ring(g, std::span(&ring, 1));
}

VelocityFieldRZ velocity_of(const ScalarFieldRZ& eta) {
  return velocity_from_stream(solve_stream_elliptic(omega_from_eta(eta)));
}

GridSpec dilate(const GridSpec& g, double lambda) {
  return GridSpec{g.nr, g.nz, lambda * g.r_max, lambda * g.z_min, lambda * g.z_max};
}

TEST(Report, RatioConventions) {
  const auto zero = make_report("x", 0.0, 0.0, 1.0);
  EXPECT_EQ(zero.ratio, 0.0);
  EXPECT_TRUE(zero.pass);
  const auto unbounded = make_report("x", 1.0, 0.0, 1.0);
  EXPECT_TRUE(std::isinf(unbounded.ratio));
  EXPECT_FALSE(unbounded.pass);
  const auto r = make_report("x", 3.0, 2.0, 1.5);
  EXPECT_DOUBLE_EQ(r.ratio, 1.5);
  EXPECT_TRUE(r.pass);
}

TEST(Report, JsonLine) {
  std::ostringstream out;
  write_report_jsonl(out, make_report("x", 1.0, 0.0, 1.0, {0.5, 0.1, 2.0, 1.0, 7}));
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["name"], "x");
  EXPECT_EQ(j["ratio"], "inf");
  EXPECT_EQ(j["pass"], false);
  EXPECT_EQ(j["t"], 0.5);
  EXPECT_EQ(j["grid_hash"], 7u);
}

TEST(Interpolation, ConstantOneOnRandomPositiveFields) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const GridSpec g{48, 64, 2.0, -1.0, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    ScalarFieldRZ f(g);
    for (int i = 1; i <= g.nr; ++i)
      for (int j = 0; j <= g.nz; ++j) f(i, j) = std::pow(unit(rng), 4.0);
    for (double p : {1.0, 4.0 / 3.0, 1.5, 2.0}) {
      const auto rep = check_interpolation(f, p);
      EXPECT_LE(rep.ratio, 1.0 + kInterpolationSlack) << "p = " << p;
      EXPECT_TRUE(rep.pass);
    }
  }
}

TEST(Interpolation, ThinRingSaturatesTheP1Case) {
  double prev = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto rep = check_interpolation_eta(ring_eta(kBase.refined(4), eps), 1.0);
    EXPECT_LE(rep.ratio, 1.0 + kInterpolationSlack);
    EXPECT_GT(rep.ratio, prev);
    prev = rep.ratio;
  }
  EXPECT_GT(prev, 0.999);
}

TEST(Interpolation, ZeroFieldAndDomain) {
  const ScalarFieldRZ zero(kBase);
  EXPECT_EQ(check_interpolation(zero, 1.5).ratio, 0.0);
  EXPECT_THROW(check_interpolation(zero, 0.5), DomainError);
  EXPECT_THROW(check_interpolation(zero, 2.5), DomainError);
  EXPECT_THROW(check_interpolation_eta(zero, 3.0), DomainError);
}

TEST(Interpolation, EtaFormMatchesTheFieldForm) {
  const auto eta = ring_eta(kBase, 0.2);
  for (double p : {1.0, 4.0 / 3.0, 2.0})
    EXPECT_NEAR(check_interpolation_eta(eta, p).ratio, check_interpolation(omega_from_eta(eta), p).ratio,
                1e-12);
}

TEST(Velocity, ZeroFieldPassesWithRatioZero) {
  const ScalarFieldRZ eta(kBase);
  const VelocityFieldRZ u(kBase);
  for (double q : {2.0, 4.0, 6.0}) {
    const auto rep = check_velocity_lq(eta, u, q);
    EXPECT_EQ(rep.ratio, 0.0);
    EXPECT_TRUE(rep.pass);
  }
  EXPECT_EQ(check_velocity_sup(eta, u).ratio, 0.0);
  EXPECT_THROW(check_velocity_lq(eta, u, 1.5), DomainError);
  EXPECT_THROW(check_velocity_lq(eta, u, 6.5), DomainError);
}

TEST(Velocity, RatiosAreInvariantUnderDilation) {
  // eta -> c eta(x / lambda) gives u -> c lambda^2 u(x / lambda).
  const auto eta = ring_eta(kBase, 0.2);
  const auto u = velocity_of(eta);
  const auto base_lq = check_velocity_lq(eta, u, 2.0).ratio;
  const auto base_sup = check_velocity_sup(eta, u).ratio;
  const auto [base_ur, base_uz] = check_velocity_sup_components(eta, u);
  for (double lambda : {2.0, 0.5}) {
    const double c = 3.0;
    const auto g = dilate(kBase, lambda);
    ScalarFieldRZ eta2(g);
    VelocityFieldRZ u2(g);
    for (std::size_t k = 0; k < eta.values().size(); ++k) {
      eta2.values()[k] = c * eta.values()[k];
      u2.ur.values()[k] = c * lambda * lambda * u.ur.values()[k];
      u2.uz.values()[k] = c * lambda * lambda * u.uz.values()[k];
    }
    for (double q : {2.0, 4.0, 6.0})
      EXPECT_NEAR(check_velocity_lq(eta2, u2, q).ratio / check_velocity_lq(eta, u, q).ratio, 1.0, 1e-12);
    EXPECT_NEAR(check_velocity_lq(eta2, u2, 2.0).ratio / base_lq, 1.0, 1e-12);
    EXPECT_NEAR(check_velocity_sup(eta2, u2).ratio / base_sup, 1.0, 1e-12);
    const auto [ur, uz] = check_velocity_sup_components(eta2, u2);
    EXPECT_NEAR(ur.ratio / base_ur.ratio, 1.0, 1e-12);
    EXPECT_NEAR(uz.ratio / base_uz.ratio, 1.0, 1e-12);
  }
}

TEST(Velocity, SupIsTheLargerOfItsComponentsOrMore) {
  const auto eta = ring_eta(kBase, 0.2);
  const auto u = velocity_of(eta);
  const auto sup = check_velocity_sup(eta, u);
  const auto [ur, uz] = check_velocity_sup_components(eta, u);
  EXPECT_GE(sup.lhs, std::max(ur.lhs, uz.lhs));
  EXPECT_EQ(sup.rhs, ur.rhs);
  EXPECT_EQ(sup.rhs, uz.rhs);
  EXPECT_EQ(sup.name, "velocity_sup");
}

ScalarFieldRZ r2_gaussian(const GridSpec& g) {
  ScalarFieldRZ f(g);
  for (int i = 0; i <= g.nr; ++i)
    for (int j = 0; j <= g.nz; ++j) f(i, j) = g.r(i) * g.r(i) * std::exp(-g.r(i) * g.r(i) - g.z(j) * g.z(j));
  return f;
}

TEST(ScalarSup, GradientMatchesTheAnalyticOne) {
  const GridSpec g{120, 240, 6.0, -6.0, 6.0};
  const auto f = r2_gaussian(g);
  const auto [fr, fz] = gradient(f);
  for (int i = 1; i < g.nr; i += 7)
    for (int j = 1; j < g.nz; j += 11) {
      const double r = g.r(i), z = g.z(j), e = std::exp(-r * r - z * z);
      EXPECT_NEAR(fr(i, j), (2.0 * r - 2.0 * r * r * r) * e, 5e-3);
      EXPECT_NEAR(fz(i, j), -2.0 * z * r * r * e, 5e-3);
    }
  for (int j = 0; j <= g.nz; ++j) EXPECT_EQ(fr(0, j), 0.0);
}

TEST(ScalarSup, StableUnderRefinement) {
  double prev = 0.0;
  for (int n : {60, 120, 240}) {
    const GridSpec g{n, 2 * n, 6.0, -6.0, 6.0};
    const auto f = r2_gaussian(g);
    const auto rep = check_scalar_sup(f, gradient(f));
    EXPECT_TRUE(std::isfinite(rep.ratio));
    EXPECT_GT(rep.ratio, 0.0);
    EXPECT_TRUE(rep.pass);
    if (prev > 0.0) EXPECT_NEAR(rep.ratio / prev, 1.0, 0.1);
    prev = rep.ratio;
  }
}

TEST(ScalarSup, DilationInvariance) {
  const GridSpec g{120, 240, 6.0, -6.0, 6.0};
  const auto f = r2_gaussian(g);
  const double base = check_scalar_sup(f, gradient(f)).ratio;
  for (double lambda : {2.0, 0.5}) {
    ScalarFieldRZ f2(dilate(g, lambda));
    for (std::size_t k = 0; k < f.values().size(); ++k) f2.values()[k] = 5.0 * f.values()[k];
    EXPECT_NEAR(check_scalar_sup(f2, gradient(f2)).ratio / base, 1.0, 1e-12);
  }
}

TEST(ScalarSup, ZeroFieldAndEdgePrecondition) {
  const GridSpec g{60, 120, 6.0, -6.0, 6.0};
  const ScalarFieldRZ zero(g);
  EXPECT_EQ(check_scalar_sup(zero, gradient(zero)).ratio, 0.0);
  auto f = r2_gaussian(GridSpec{60, 120, 2.0, -2.0, 2.0});
  EXPECT_THROW(check_scalar_sup(f, gradient(f)), DomainError);
}

TEST(FarField, ThinRingSatisfiesTheBound) {
  const auto eta = ring_eta(GridSpec{256, 384, 5.0, -4.0, 4.0}, 0.1);
  const std::vector<double> radii = {20.0, 40.0};
  const auto reps = check_far_field(eta, radii);
  ASSERT_EQ(reps.size(), 2u);
  for (const auto& r : reps) {
    EXPECT_TRUE(r.pass) << r.name << " ratio " << r.ratio;
    EXPECT_GT(r.lhs, 0.0);
  }
  EXPECT_LT(reps[1].lhs, reps[0].lhs);
}

TEST(FarField, DecaysMonotonicallyAlongRays) {
  const auto eta = ring_eta(kBase, 0.2);
  const auto omega = omega_from_eta(eta);
  for (double th : {0.0, 0.7, 1.5707963267948966, 2.5}) {
    std::vector<Point> pts;
    for (double rad = 10.0; rad <= 40.0; rad += 2.5) pts.push_back({rad * std::sin(th), rad * std::cos(th)});
    const auto u = velocity_direct(omega, pts);
    for (std::size_t k = 1; k < u.size(); ++k)
      EXPECT_LT(std::hypot(u[k].ur, u[k].uz), std::hypot(u[k - 1].ur, u[k - 1].uz));
  }
}

TEST(FarField, ProbeInsideTheSupportIsADomainError) {
  const auto eta = ring_eta(kBase, 0.2);
  EXPECT_GT(support_radius(eta), 1.0);
  const std::vector<double> radii = {1.0};
  EXPECT_THROW(check_far_field(eta, radii), DomainError);
  const std::vector<double> far = {20.0};
  const auto zero = check_far_field(ScalarFieldRZ(kBase), far);
  EXPECT_EQ(zero[0].lhs, 0.0);
  EXPECT_TRUE(zero[0].pass);
}

TEST(Series, AppendNeedsIncreasingTimes) {
  DiagnosticsSeries s;
  s.append({0.0, 0, {{"a", 1.0}}, {}});
  s.append({0.1, 3, {{"a", 2.0}}, {}});
  EXPECT_THROW(s.append({0.1, 4, {{"a", 3.0}}, {}}), StateError);
  EXPECT_EQ(s.series("a"), (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(s.times(), (std::vector<double>{0.0, 0.1}));
}

TEST(Series, DiagnoseRecordsEveryQuantity) {
  const auto eta = ring_eta(kBase, 0.2);
  const auto u = velocity_of(eta);
  const auto rec = diagnose(0.0, 0, eta, u, {0.0, 0.2, 1.0, 1.0, kBase.hash()});
  for (const auto& q : diagnostic_quantities()) EXPECT_TRUE(rec.values.count(q)) << q;
  EXPECT_FALSE(rec.reports.empty());
  for (const auto& r : rec.reports) EXPECT_TRUE(r.pass) << r.name << " ratio " << r.ratio;
  DiagnosticsSeries s;
  s.append(rec);
  std::ostringstream out;
  s.write_csv(out);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("t,steps,", 0), 0u);
  EXPECT_NE(text.find("interpolation_p1_ratio"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_TRUE(s.all_pass());
}

TEST(Decay, NormExponents) {
  EXPECT_EQ(norm_exponent("eta_l2"), 2.0);
  EXPECT_EQ(norm_exponent("eta_l4"), 4.0);
  EXPECT_TRUE(std::isinf(norm_exponent("eta_linf")));
  EXPECT_EQ(norm_exponent("momentum_z"), 0.0);
}

TEST(Decay, PowerLawSlopeAndEnvelope) {
  std::vector<double> t, q;
  for (int k = 0; k < 40; ++k) {
    t.push_back(0.01 * std::pow(50.0, k / 39.0));
    q.push_back(3.0 * std::pow(t.back(), -1.5));
  }
  const auto fit = fit_decay(t, q, 0.01, 0.5, 1.5);
  EXPECT_NEAR(fit.slope, -1.5, 1e-12);
  EXPECT_NEAR(fit.envelope_max, 3.0, 1e-12);
  EXPECT_LT(fit.samples, 40);
  EXPECT_GE(fit.samples, 8);
}

TEST(Decay, TooFewSamplesIsADomainError) {
  const std::vector<double> t = {0.1, 0.2, 0.3, 0.4, 0.5}, q = {1, 2, 3, 4, 5};
  EXPECT_THROW(fit_decay(t, q, 0.1, 0.5, 0.0), DomainError);
  EXPECT_THROW(fit_decay(t, q, 1.0, 2.0, 0.0), DomainError);
}

TEST(Decay, SeriesFormUsesTheNormExponent) {
  DiagnosticsSeries s;
  for (int k = 0; k < 20; ++k) {
    const double t = 0.05 * (k + 1);
    s.append({t, k, {{"eta_linf", 2.0 * std::pow(t, -1.5)}, {"eta_l2", std::pow(t, -0.75)}}, {}});
  }
  const auto inf = fit_decay(s, "eta_linf", 0.0, 1.0);
  EXPECT_NEAR(inf.slope, -1.5, 1e-12);
  EXPECT_NEAR(inf.envelope_max, 2.0, 1e-12);
  EXPECT_NEAR(fit_decay(s, "eta_l2", 0.0, 1.0).envelope_max, 1.0, 1e-12);
}

// Brute force over A; B is then the smallest feasible value.
double brute_envelope_cost(std::span<const double> t, std::span<const double> e) {
  double amax = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) amax = std::max(amax, e[k] / std::sqrt(t[k]));
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 200000; ++n) {
    const double a = amax * n / 200000.0;
    double b = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      b = std::max(b, (e[k] - a * std::sqrt(t[k])) / std::pow(t[k], 0.75));
    double cost = 0.0;
    for (double tk : t) cost += a * std::sqrt(tk) + b * std::pow(tk, 0.75);
    best = std::min(best, cost);
  }
  return best;
}

TEST(Envelope, LeastUpperBoundMatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> t, e;
    for (int k = 0; k < 12; ++k) {
      t.push_back(0.5 * std::pow(unit(rng), 2.0) + 1e-4);
      e.push_back(unit(rng) * std::sqrt(t.back()) + unit(rng) * t.back());
    }
    const auto [a, b] = fit_upper_envelope(t, e);
    EXPECT_GE(a, 0.0);
    EXPECT_GE(b, 0.0);
    double cost = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double env = a * std::sqrt(t[k]) + b * std::pow(t[k], 0.75);
      EXPECT_GE(env, e[k] * (1.0 - 1e-12));
      cost += env;
    }
    EXPECT_LE(cost, brute_envelope_cost(t, e) * (1.0 + 1e-9));
  }
}

TEST(Envelope, RecoversAnExactEnvelope) {
  std::vector<double> t, e;
  for (double tk : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    t.push_back(tk);
    e.push_back(0.3 * std::sqrt(tk) + 0.7 * std::pow(tk, 0.75));
  }
  const auto [a, b] = fit_upper_envelope(t, e);
  EXPECT_NEAR(a, 0.3, 1e-10);
  EXPECT_NEAR(b, 0.7, 1e-10);
}

std::vector<AttainmentRow> synthetic_rows(std::vector<double> eps_list, double scale_small) {
  std::vector<AttainmentRow> rows;
  for (double eps : eps_list) {
    const double s = eps == eps_list.front() ? 1.0 : scale_small;
    for (double t : {0.0, eps * eps, 0.01, 0.1, 0.5})
      rows.push_back({eps, t, s * (eps + std::sqrt(t) + std::pow(t, 0.75))});
  }
  return rows;
}

TEST(Attainment, SummaryOfSyntheticRows) {
  const auto rows = synthetic_rows({0.2, 0.1, 0.05}, 1.0);
  const auto res = summarize_attainment(rows);
  EXPECT_EQ(res.eps, (std::vector<double>{0.2, 0.1, 0.05}));
  ASSERT_EQ(res.diagonal.size(), 3u);
  EXPECT_TRUE(res.diagonal_decreasing);
  EXPECT_TRUE(res.dominated);
  EXPECT_GT(res.envelope_a, 0.0);

  const auto worse = summarize_attainment(synthetic_rows({0.2, 0.1}, 2.0));
  EXPECT_FALSE(worse.dominated);
  EXPECT_GT(worse.worst_envelope_ratio, 1.1);
}

TEST(Attainment, MissingDiagonalIsADomainError) {
  std::vector<AttainmentRow> rows = {{0.2, 0.0, 1.0}, {0.2, 0.1, 1.0}};
  EXPECT_THROW(summarize_attainment(rows), DomainError);
  EXPECT_THROW(summarize_attainment({}), DomainError);
}

TEST(Attainment, TestFieldMustFitTheGrid) {
  auto inside = [](double r, double z) { return test_bump(r, z, {1.1, 0.25}, 1.0); };
  auto outside = [](double r, double z) { return test_bump(r, z, {4.5, 0.0}, 1.0); };
  EXPECT_NO_THROW(check_test_field_support(kBase, inside));
  EXPECT_THROW(check_test_field_support(kBase, outside), ConfigError);
}

TEST(Attainment, InitialErrorVanishesWithEps) {
  auto phi = [](double r, double z) { return test_bump(r, z, {1.1, 0.25}, 1.0); };
  // Fine enough that node sampling of the smallest core is far below E.
  const RingSpec base{1.0, 1.0, 0.0, 0.2};
  const GridSpec g = kBase.refined(8);
  std::vector<double> errs;
  for (double eps : {0.2, 0.1, 0.05}) {
    RingSpec ring = base;
    ring.eps = eps;
    const auto row = attainment_row(ring, 0.0, make_mollified_ring(g, std::span(&ring, 1)), phi);
    errs.push_back(row.error);
  }
  EXPECT_LT(errs[1], 0.6 * errs[0]) << errs[0] << ' ' << errs[1];
  EXPECT_LT(errs[2], 0.6 * errs[1]) << errs[1] << ' ' << errs[2];
}

TEST(Attainment, FieldAwayFromTheRingPairsToNearlyZero) {
  auto phi = [](double r, double z) { return test_bump(r, z, {3.0, 2.0}, 0.8); };
  const RingSpec ring{1.0, 1.0, 0.0, 0.1};
  const auto eta = make_mollified_ring(kBase.refined(2), std::span(&ring, 1));
  EXPECT_EQ(attainment_pairing(eta, phi), 0.0);
  EXPECT_EQ(attainment_row(ring, 0.0, eta, phi).error, 0.0);
}

TEST(Calibration, BuiltinMatchesTheShippedFile) {
  const auto shipped = Calibration::load(std::string(RINGLAB_CONFIG_DIR) + "/calibration.json");
  EXPECT_EQ(shipped.constants(), Calibration::builtin().constants());
  for (const char* name : {"velocity_l2", "velocity_l4", "velocity_l6", "velocity_sup", "velocity_sup_ur",
                           "velocity_sup_uz", "scalar_sup"})
    EXPECT_GT(Calibration::builtin().at(name), 0.0);
}

TEST(Calibration, LoadErrors) {
  const auto dir = fs::temp_directory_path() / "ringlab_cal_test";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  EXPECT_THROW(Calibration::load((dir / "missing.json").string()), IoError);
  EXPECT_THROW(Calibration::load(write("bad.json", "{ not json")), IoError);
  EXPECT_THROW(Calibration::load(write("none.json", "{\"x\": 1}")), IoError);
  EXPECT_THROW(Calibration::load(write("str.json", "{\"constants\": {\"a\": \"b\"}}")), IoError);
  const auto ok = Calibration::load(write("ok.json", "{\"constants\": {\"velocity_l2\": 0.5}}"));
  EXPECT_EQ(ok.at("velocity_l2"), 0.5);
  EXPECT_THROW(ok.at("velocity_l4"), ConfigError);
  fs::remove_all(dir);
}

}  // namespace
