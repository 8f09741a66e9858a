#include "ringlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ringlab/error.hpp"
#include "ringlab/kernel.hpp"

#ifndef RINGLAB_VERSION
#define RINGLAB_VERSION "unknown"
#endif

namespace ringlab {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kL1Slack = 1e-12;
constexpr double kNashWindowStart = 0.01;
constexpr double kNashWindowEnd = 0.5;

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string utc_stamp(std::chrono::system_clock::time_point t, const char* fmt) {
  const std::time_t c = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&c, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, fmt);
  return s.str();
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

fs::path fresh_dir(const fs::path& out_dir, const std::string& stem) {
  fs::create_directories(out_dir);
  fs::path dir = out_dir / stem;
  for (int k = 1; fs::exists(dir); ++k) dir = out_dir / (stem + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

Calibration calibration_for(const RunConfig& cfg) {
  if (cfg.verify.calibration.empty()) return Calibration::builtin();
  return Calibration::load(cfg.verify.calibration);
}

ReportContext context_for(const RunConfig& cfg) {
  ReportContext ctx;
  if (!cfg.sim.rings.empty()) {
    ctx.kappa = cfg.sim.rings.front().kappa;
    ctx.r0 = cfg.sim.rings.front().r0;
    ctx.eps = cfg.sim.rings.front().eps;
  }
  ctx.grid_hash = cfg.sim.grid.hash();
  return ctx;
}

std::string snapshot_name(std::size_t k) {
  std::ostringstream s;
  s << "snapshots/eta_" << std::setw(5) << std::setfill('0') << k << ".bin";
  return s.str();
}

json audit_json(const RunAudit& a) {
  return {{"min_eta", num(a.min_eta)},
          {"max_l1_increase", num(a.max_l1_increase)},
          {"l1_initial", num(a.l1_initial)},
          {"momentum_initial", num(a.momentum_initial)},
          {"max_momentum_drift", num(a.max_momentum_drift)},
          {"steps", a.steps},
          {"wall_seconds", a.wall_seconds}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
}

struct Summary {
  std::string name;
  int count = 0;
  int failures = 0;
  double max_ratio = 0.0;
  double threshold = 0.0;
};

void print_table(const std::vector<EstimateReport>& reports, std::ostream& out) {
  std::vector<Summary> rows;
  for (const auto& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Summary& s) { return s.name == r.name; });
    if (it == rows.end()) {
      rows.push_back({r.name, 0, 0, 0.0, r.threshold});
      it = rows.end() - 1;
    }
    ++it->count;
    if (!r.pass) ++it->failures;
    it->max_ratio = std::max(it->max_ratio, r.ratio);
  }
  out << std::left << std::setw(28) << "check" << std::right << std::setw(7) << "count" << std::setw(15)
      << "max ratio" << std::setw(13) << "threshold" << "  result\n";
  for (const auto& s : rows) {
    out << std::left << std::setw(28) << s.name << std::right << std::setw(7) << s.count
        << std::setw(15) << std::setprecision(8) << s.max_ratio << std::setw(13) << std::setprecision(6)
        << s.threshold << "  " << (s.failures == 0 ? "pass" : "FAIL") << '\n';
  }
}

// Velocity exactly as the run computed it at a snapshot: fresh edges, then the solve.
VelocityFieldRZ snapshot_velocity(const ScalarFieldRZ& eta, const SimConfig& sim, StreamSolver& solver) {
  SimState s;
  s.eta = eta;
  s.psi = ScalarFieldRZ(eta.grid());
  s.u = VelocityFieldRZ(eta.grid());
  refresh_velocity(s, solver, sim.boundary, true);
  return std::move(s.u);
}

double nash_envelope(const std::vector<double>& t, const std::vector<double>& sup) {
  double env = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= kNashWindowStart * (1.0 - 1e-12) && t[k] <= kNashWindowEnd * (1.0 + 1e-12))
      env = std::max(env, std::pow(t[k], 1.5) * sup[k]);
  return env;
}

}  // namespace

SimulateOutcome simulate_config(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  SimulateOutcome outcome;
  const auto started = std::chrono::system_clock::now();
  const auto cal = calibration_for(config);
  outcome.run_dir = fresh_dir(out_dir, hex(config.hash()) + "-" + utc_stamp(started, "%Y%m%dT%H%M%S"));
  fs::create_directories(outcome.run_dir / "snapshots");
  write_text(outcome.run_dir / "config.ini", config.text);

  std::ofstream reports(outcome.run_dir / "reports.jsonl", std::ios::trunc);
  if (!reports) throw IoError("cannot write reports in " + outcome.run_dir.string());
  DiagnosticsSeries series;
  json snapshots = json::array();
  const ReportContext ctx = context_for(config);
  SimConfig sim = config.sim;
  sim.keep_snapshots = false;
  std::string io_error;
  auto on_snapshot = [&](const Snapshot& s) {
    if (!io_error.empty()) return;
    try {
      const std::string name = snapshot_name(snapshots.size());
      write_binary(s.eta, outcome.run_dir / name);
      auto record = diagnose(s.t, s.steps, s.eta, s.u, ctx, cal);
      for (const auto& r : record.reports) write_report_jsonl(reports, r);
      series.append(std::move(record));
      snapshots.push_back({{"t", s.t}, {"steps", s.steps}, {"path", name}});
    } catch (const Error& e) {
      io_error = e.what();
    }
  };
  log << "simulate: " << outcome.run_dir.string() << '\n';
  const RunResult result = run(sim, on_snapshot);
  const std::string error = !io_error.empty() ? io_error : result.error;
  {
    std::ofstream csv(outcome.run_dir / "diagnostics.csv", std::ios::trunc);
    if (!csv) throw IoError("cannot write diagnostics in " + outcome.run_dir.string());
    series.write_csv(csv);
  }

  const auto& a = result.audit;
  json failures = json::array();
  if (a.min_eta < 0.0) failures.push_back("audit_positivity");
  if (a.max_l1_increase > kL1Slack * std::max(1.0, a.l1_initial)) failures.push_back("audit_l1_monotone");
  if (a.max_momentum_drift > config.verify.momentum_tolerance) failures.push_back("audit_momentum");
  for (const auto& rec : series.records())
    for (const auto& r : rec.reports)
      if (!r.pass && std::find(failures.begin(), failures.end(), r.name) == failures.end())
        failures.push_back(r.name);
  if (!error.empty()) failures.push_back("run_error");

  const auto finished = std::chrono::system_clock::now();
  json manifest{
      {"tool", "ringlab"},
      {"version", RINGLAB_VERSION},
      {"config", config.text},
      {"config_hash", hex(config.hash())},
      {"grid_hash", hex(config.sim.grid.hash())},
      {"started", utc_stamp(started, "%Y-%m-%dT%H:%M:%SZ")},
      {"finished", utc_stamp(finished, "%Y-%m-%dT%H:%M:%SZ")},
      {"wall_seconds", std::chrono::duration<double>(finished - started).count()},
      {"snapshots", snapshots},
      {"diagnostics", "diagnostics.csv"},
      {"reports", "reports.jsonl"},
      {"audit", audit_json(a)},
      {"verification", {{"all_pass", failures.empty()}, {"failures", failures}}},
      {"error", error.empty() ? json(nullptr) : json(error)},
  };
  outcome.manifest = outcome.run_dir / "manifest.json";
  write_text(outcome.manifest, manifest.dump(2) + "\n");
  log << "  steps " << a.steps << ", wall " << std::setprecision(3) << a.wall_seconds << " s, "
      << snapshots.size() << " snapshots, " << (failures.empty() ? "all checks pass" : "FAILURES") << '\n';
  for (const auto& f : failures) log << "  failed: " << f.get<std::string>() << '\n';
  if (!error.empty()) log << "  error: " << error << '\n';
  outcome.exit_code = failures.empty() ? kExitOk : kExitFailure;
  return outcome;
}

int cmd_simulate(const std::string& config_path, const fs::path& out_dir, std::ostream& log) {
  try {
    return simulate_config(load_config(config_path), out_dir, log).exit_code;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    log << "io error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    log << "io error: " << e.what() << '\n';
  } catch (const Error& e) {
    log << "simulate: FAIL: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

VerifyOutcome verify_manifest(const fs::path& manifest_path, const std::string& suite, std::ostream& table) {
  if (std::find(verify_suites().begin(), verify_suites().end(), suite) == verify_suites().end())
    throw ConfigError("unknown suite '" + suite + "'");
  const json manifest = read_json(manifest_path);
  if (!manifest.contains("config") || !manifest.contains("snapshots"))
    throw IoError("manifest " + manifest_path.string() + " lacks config or snapshots");
  const RunConfig cfg = parse_config(manifest["config"].get<std::string>(), manifest_path.string());
  const auto cal = calibration_for(cfg);
  const fs::path dir = manifest_path.parent_path();
  const bool all = suite == "all";
  const auto& sim = cfg.sim;
  ReportContext ctx = context_for(cfg);

  VerifyOutcome out;
  std::optional<StreamSolver> solver;
  const bool need_u = all || suite == "velocity" || suite == "decay";
  if (need_u) {
    EllipticOptions options;
    options.deferred_correction = sim.elliptic_correction;
    solver.emplace(sim.grid, options);
  }
  const auto phi = [&](double r, double z) {
    return test_bump(r, z, cfg.verify.test_center, cfg.verify.test_radius);
  };
  if (all || suite == "attainment") {
    if (sim.rings.size() != 1) throw ConfigError("attainment suite needs exactly one ring");
    check_test_field_support(sim.grid, phi);
  }

  DiagnosticsSeries series;
  double l1_prev = kInf, momentum0 = 0.0;
  double max_l1_increase = 0.0, max_drift = 0.0, min_eta = kInf;
  std::size_t count = 0;
  ScalarFieldRZ first, last;
  for (const auto& entry : manifest["snapshots"]) {
    const double t = entry.at("t").get<double>();
    const fs::path path = dir / entry.at("path").get<std::string>();
    if (!fs::exists(path)) throw IoError("missing snapshot " + path.string());
    ScalarFieldRZ eta = read_binary(path);
    if (!(eta.grid() == sim.grid)) throw IoError("snapshot " + path.string() + " has a different grid");
    ctx.t = t;
    if (all || suite == "interpolation")
      for (double p : {1.0, 4.0 / 3.0, 2.0}) out.reports.push_back(check_interpolation_eta(eta, p, ctx));
    if (need_u) {
      const auto u = snapshot_velocity(eta, sim, *solver);
      auto record = diagnose(t, entry.at("steps").get<long long>(), eta, u, ctx, cal);
      if (all || suite == "velocity")
        for (auto& r : record.reports)
          if (r.name.rfind("velocity", 0) == 0) out.reports.push_back(r);
      series.append(std::move(record));
    }
    if (all || suite == "decay") {
      const double l1 = norm_lp_3d(eta, 1.0);
      if (count == 0) momentum0 = signed_momentum_z(eta);
      else max_l1_increase = std::max(max_l1_increase, l1 - l1_prev);
      l1_prev = l1;
      if (momentum0 != 0.0) max_drift = std::max(max_drift, std::abs(signed_momentum_z(eta) / momentum0 - 1.0));
      min_eta = std::min(min_eta, eta.min_value());
    }
    if (all || suite == "attainment")
      if (t <= 0.5 * (1.0 + 1e-12)) out.attainment.push_back(attainment_row(sim.rings.front(), t, eta, phi));
    if (count == 0) first = eta;
    last = std::move(eta);
    ++count;
  }
  if (count == 0) throw IoError("manifest " + manifest_path.string() + " lists no snapshots");

  if (all || suite == "velocity") {
    std::vector<double> radii = cfg.verify.far_field_radii;
    for (const auto* eta : {&first, &last}) {
      ctx.t = eta == &first ? 0.0 : series.records().back().t;
      const double R = support_radius(*eta);
      std::vector<double> usable;
      for (double rad : radii)
        if (rad > R) usable.push_back(rad);
      for (auto& r : check_far_field(*eta, usable, 9, 1e-3, ctx)) out.reports.push_back(std::move(r));
      if (count == 1) break;
    }
    ctx.t = series.records().back().t;
    const double r0 = sim.rings.front().r0;
    out.reports.push_back(radial_decay_exponent(last, sim.rings.front().z0, 10.0 * r0, 40.0 * r0, ctx));
  }

  if (all || suite == "decay") {
    const auto t = series.times();
    const auto sup = series.series("eta_linf");
    out.nash_envelope = nash_envelope(t, sup);
    ctx.t = t.back();
    auto nash = make_report("nash_envelope", out.nash_envelope, 1.0, kInf, ctx);
    nash.pass = std::isfinite(out.nash_envelope);
    out.reports.push_back(nash);
    out.reports.push_back(make_report("audit_positivity", min_eta < 0.0 ? -min_eta : 0.0, 1.0, 0.0, ctx));
    out.reports.push_back(make_report("audit_l1_monotone", std::max(0.0, max_l1_increase),
                                      kL1Slack * std::max(1.0, first.values().empty() ? 1.0 : norm_lp_3d(first, 1.0)),
                                      1.0, ctx));
    out.reports.push_back(make_report("audit_momentum", max_drift, cfg.verify.momentum_tolerance, 1.0, ctx));
    table << "decay fits (log-log slope, envelope max of t^{3/2(1-1/p)} q):\n";
    table << std::left << std::setw(12) << "quantity" << std::setw(10) << "window" << std::right
          << std::setw(12) << "slope" << std::setw(16) << "envelope" << std::setw(9) << "samples\n";
    for (const std::string q : {"eta_linf", "eta_l4", "eta_l2", "u_sup"}) {
      for (const auto& [label, w] : {std::pair{"early", cfg.verify.decay_early}, std::pair{"late", cfg.verify.decay_late}}) {
        table << std::left << std::setw(12) << q << std::setw(10) << label << std::right;
        try {
          const auto fit = fit_decay(series, q, w.first, w.second);
          table << std::setw(12) << std::setprecision(5) << fit.slope << std::setw(16) << std::setprecision(8)
                << fit.envelope_max << std::setw(8) << fit.samples << '\n';
        } catch (const DomainError& e) {
          table << "  (" << e.what() << ")\n";
        }
      }
    }
  }

  if (all || suite == "attainment") {
    table << "attainment E(eps, t), eps = " << sim.rings.front().eps << ":\n";
    for (const auto& row : out.attainment)
      table << "  t = " << std::setw(10) << std::setprecision(6) << row.t << "  E = " << std::setprecision(8)
            << row.error << '\n';
    std::vector<double> ts, es;
    for (const auto& row : out.attainment)
      if (row.t > 0.0) {
        ts.push_back(row.t);
        es.push_back(row.error);
      }
    if (!ts.empty()) {
      const auto [A, B] = fit_upper_envelope(ts, es);
      table << "  envelope A = " << A << ", B = " << B << '\n';
      double worst = 0.0;
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const double env = A * std::sqrt(ts[k]) + B * std::pow(ts[k], 0.75);
        worst = std::max(worst, env > 0.0 ? es[k] / env : (es[k] > 0.0 ? kInf : 0.0));
      }
      out.reports.push_back(make_report("attainment_envelope", worst, 1.0, 1.0 + 1e-9, ctx));
    }
  }

  for (const auto& r : out.reports) out.pass = out.pass && r.pass;
  print_table(out.reports, table);
  const fs::path jsonl = dir / ("verify_" + suite + ".jsonl");
  std::ofstream j(jsonl, std::ios::trunc);
  if (!j) throw IoError("cannot write " + jsonl.string());
  for (const auto& r : out.reports) write_report_jsonl(j, r);
  return out;
}

int cmd_verify(const fs::path& manifest, const std::string& suite, std::ostream& out) {
  try {
    const auto v = verify_manifest(manifest, suite, out);
    out << (v.pass ? "verify: pass\n" : "verify: FAIL\n");
    return v.pass ? kExitOk : kExitFailure;
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    out << "io error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    out << "io error: " << e.what() << '\n';
  } catch (const Error& e) {
    out << "verify: FAIL: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

namespace {

struct SweepPoint {
  double kappa = 0.0;
  double eps = 0.0;
  GridSpec grid;
  RunConfig config;
  std::string status = "pending";
  bool completed = false;
  std::string run_dir;
  double nash = 0.0;
  std::vector<AttainmentRow> attainment;
  std::vector<EstimateReport> reports;
};

RunConfig point_config(const RunConfig& base, double kappa, double eps, int nr, int nz) {
  ConfigEcho echo;
  for (const auto& [name, entries] : base.echo) {
    if (name == "sweep") continue;
    auto copy = entries;
    auto set = [&](const std::string& key, const std::string& value) {
      for (auto& [k, v] : copy)
        if (k == key) {
          v = value;
          return;
        }
      copy.emplace_back(key, value);
    };
    auto text = [](double v) {
      std::ostringstream s;
      s << std::setprecision(17) << v;
      return s.str();
    };
    if (name == "ring") {
      set("kappa", text(kappa));
      set("eps", text(eps));
    } else if (name == "grid") {
      set("nr", std::to_string(nr));
      set("nz", std::to_string(nz));
    }
    echo.emplace_back(name, std::move(copy));
  }
  return parse_config(render_config(echo), "sweep point");
}

}  // namespace

int cmd_sweep(const std::string& config_path, const fs::path& out_dir, int jobs, std::ostream& out) {
  std::vector<SweepPoint> points;
  fs::path dir;
  try {
    const RunConfig base = load_config(config_path);
    const auto& w = base.sweep;
    if (w.empty()) throw ConfigError(config_path + ": [sweep] needs at least one of kappa, eps, grid");
    if (base.sim.rings.size() != 1) throw ConfigError(config_path + ": a sweep varies exactly one [ring]");
    const auto& ring = base.sim.rings.front();
    const auto kappas = w.kappa.empty() ? std::vector<double>{ring.kappa} : w.kappa;
    const auto epss = w.eps.empty() ? std::vector<double>{ring.eps} : w.eps;
    auto grids = w.grids;
    if (grids.empty()) grids.emplace_back(base.sim.grid.nr, base.sim.grid.nz);
    for (double k : kappas)
      for (double e : epss) {
        bool placed = false;
        for (const auto& [nr, nz] : grids) {
          if (placed && w.grid_policy == GridPolicy::kCoarsestValid) break;
          SweepPoint p;
          p.kappa = k;
          p.eps = e;
          p.grid = base.sim.grid;
          p.grid.nr = nr;
          p.grid.nz = nz;
          try {
            p.config = point_config(base, k, e, nr, nz);
            p.status = "pending";
            placed = true;
          } catch (const ConfigError& err) {
            if (w.grid_policy == GridPolicy::kCoarsestValid) continue;
            p.status = std::string("config error: ") + err.what();
          }
          points.push_back(std::move(p));
        }
        if (!placed && w.grid_policy == GridPolicy::kCoarsestValid) {
          SweepPoint p;
          p.kappa = k;
          p.eps = e;
          p.status = "config error: no listed grid resolves this point";
          points.push_back(std::move(p));
        }
      }
    dir = fresh_dir(out_dir, "sweep-" + hex(base.hash()) + "-" +
                                 utc_stamp(std::chrono::system_clock::now(), "%Y%m%dT%H%M%S"));
    write_text(dir / "sweep.ini", base.text);
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    out << "io error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    out << "io error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      auto& p = points[k];
      if (p.status != "pending") continue;
      std::ostringstream log;
      try {
        const auto sim = simulate_config(p.config, dir / "runs", log);
        p.run_dir = fs::relative(sim.run_dir, dir).string();
        std::ostringstream table;
        const auto v = verify_manifest(sim.manifest, "all", table);
        p.nash = v.nash_envelope;
        p.attainment = v.attainment;
        p.reports = v.reports;
        p.completed = true;
        p.status = sim.exit_code == kExitOk && v.pass ? "pass" : "fail";
      } catch (const Error& e) {
        p.status = std::string("error: ") + e.what();
      } catch (const fs::filesystem_error& e) {
        p.status = std::string("error: ") + e.what();
      }
      std::lock_guard lock(log_mutex);
      out << "point kappa=" << p.kappa << " eps=" << p.eps << " grid=" << p.grid.nr << 'x' << p.grid.nz
          << ": " << p.status << '\n'
          << log.str();
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < std::max(1, jobs); ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool ok = true;
  json summary = json::object();
  try {
    std::ofstream pts(dir / "points.csv");
    pts << "kappa,eps,nr,nz,status,nash_envelope,run_dir\n" << std::setprecision(17);
    for (const auto& p : points) {
      pts << p.kappa << ',' << p.eps << ',' << p.grid.nr << ',' << p.grid.nz << ",\"" << p.status << "\","
          << p.nash << ',' << p.run_dir << '\n';
      ok = ok && p.status == "pass";
    }

    // Nash envelope against kappa at fixed (eps, grid).
    std::ofstream kfit(dir / "kappa_fit.csv");
    kfit << "eps,nr,nz,points,slope,proportional_slope,slope_ratio,r_squared,pass\n" << std::setprecision(10);
    json kappa_rows = json::array();
    for (const auto& p : points) {
      if (!p.completed) continue;
      std::vector<const SweepPoint*> group;
      for (const auto& q : points)
        if (q.completed && q.eps == p.eps && q.grid == p.grid) group.push_back(&q);
      if (group.size() < 2 || group.front() != &p) continue;
      double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
      const double n = static_cast<double>(group.size());
      const SweepPoint* ref = group.front();
      for (const auto* q : group) {
        const double x = std::abs(q->kappa), y = q->nash;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        if (std::abs(std::abs(q->kappa) - 1.0) < std::abs(std::abs(ref->kappa) - 1.0)) ref = q;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      const double prop = ref->nash / std::abs(ref->kappa);
      // Proportional fit y = c x and its coefficient of determination.
      const double c = sxy / sxx;
      const double ss_res = syy - 2.0 * c * sxy + c * c * sxx;
      const double ss_tot = syy - sy * sy / n;
      const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
      const bool pass = std::abs(slope / prop - 1.0) <= 0.1 && r2 >= 0.99;
      ok = ok && pass;
      kfit << p.eps << ',' << p.grid.nr << ',' << p.grid.nz << ',' << group.size() << ',' << slope << ','
           << prop << ',' << slope / prop << ',' << r2 << ',' << (pass ? 1 : 0) << '\n';
      kappa_rows.push_back({{"eps", p.eps}, {"slope_ratio", slope / prop}, {"r_squared", r2}, {"pass", pass}});
    }
    summary["kappa_fit"] = kappa_rows;

    // Nash envelope spread across eps and the attainment table at fixed kappa.
    std::ofstream efit(dir / "eps_uniformity.csv");
    efit << "kappa,points,min_envelope,max_envelope,spread,pass\n" << std::setprecision(10);
    std::ofstream att(dir / "attainment.csv");
    att << "kappa,eps,t,error\n" << std::setprecision(17);
    json eps_rows = json::array();
    std::vector<double> seen;
    for (const auto& p : points) {
      if (!p.completed || std::find(seen.begin(), seen.end(), p.kappa) != seen.end()) continue;
      seen.push_back(p.kappa);
      std::vector<const SweepPoint*> group;
      for (const auto& q : points)
        if (q.completed && q.kappa == p.kappa) group.push_back(&q);
      std::vector<AttainmentRow> rows;
      double lo = kInf, hi = 0.0;
      std::vector<double> eps_seen;
      for (const auto* q : group) {
        if (std::find(eps_seen.begin(), eps_seen.end(), q->eps) != eps_seen.end()) continue;
        eps_seen.push_back(q->eps);
        lo = std::min(lo, q->nash);
        hi = std::max(hi, q->nash);
        for (const auto& row : q->attainment) {
          rows.push_back(row);
          att << p.kappa << ',' << row.eps << ',' << row.t << ',' << row.error << '\n';
        }
      }
      if (eps_seen.size() < 2) continue;
      const double spread = hi / lo - 1.0;
      const bool pass = spread <= 0.5;
      ok = ok && pass;
      efit << p.kappa << ',' << eps_seen.size() << ',' << lo << ',' << hi << ',' << spread << ','
           << (pass ? 1 : 0) << '\n';
      json row{{"kappa", p.kappa}, {"nash_spread", spread}, {"pass", pass}};
      try {
        const auto a = summarize_attainment(rows);
        row["attainment_diagonal"] = a.diagonal;
        row["attainment_diagonal_decreasing"] = a.diagonal_decreasing;
        row["attainment_worst_envelope_ratio"] = num(a.worst_envelope_ratio);
        row["attainment_dominated"] = a.dominated;
        ok = ok && a.diagonal_decreasing && a.dominated;
      } catch (const DomainError& e) {
        row["attainment_error"] = e.what();
      }
      eps_rows.push_back(row);
    }
    summary["eps_uniformity"] = eps_rows;
    summary["all_pass"] = ok;
    write_text(dir / "summary.json", summary.dump(2) + "\n");
  } catch (const Error& e) {
    out << "io error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "sweep: " << dir.string() << '\n' << summary.dump(2) << '\n';
  out << (ok ? "sweep: pass\n" : "sweep: FAIL\n");
  return ok ? kExitOk : kExitFailure;
}

int cmd_kernel_table(double s_lo, double s_hi, int count, std::ostream& out) {
  if (!(s_lo > 0.0) || !(s_hi >= s_lo) || !std::isfinite(s_hi) || count < 1) return kExitUsage;
  write_kernel_table(out, s_lo, s_hi, count);
  return kExitOk;
}

}  // namespace ringlab
