#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ringlab/config.hpp"
#include "ringlab/error.hpp"
#include "ringlab/runner.hpp"

namespace {

using namespace ringlab;
namespace fs = std::filesystem;
using nlohmann::json;

const char* kSmall = R"(# small ring
[grid]
nr = 64
nz = 96
r_max = 5
z_min = -4
z_max = 4

[ring]
kappa = 1
r0 = 1
z0 = 0
eps = 0.4

[run]
t_end = 0.02
velocity_refresh = 2

[snapshots]
every = 0.002

[verify]
decay_early = 0.002, 0.01
decay_late = 0.01, 0.02
far_field_radii = 20
)";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ringlab_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }
  fs::path dir_;
};

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, BaselineFile) {
  const auto cfg = load_config(std::string(RINGLAB_CONFIG_DIR) + "/baseline.ini");
  EXPECT_EQ(cfg.sim.grid.nr, 256);
  EXPECT_EQ(cfg.sim.grid.nz, 384);
  ASSERT_EQ(cfg.sim.rings.size(), 1u);
  EXPECT_EQ(cfg.sim.rings[0].eps, 0.1);
  EXPECT_EQ(cfg.sim.t_end, 0.5);
  EXPECT_EQ(cfg.sim.boundary, BoundaryMode::kFast);
  EXPECT_FALSE(cfg.sim.snapshot_times.empty());
  EXPECT_EQ(cfg.sim.snapshot_times.back(), 0.5);
  EXPECT_TRUE(cfg.sweep.empty());
  EXPECT_EQ(cfg.verify.far_field_radii, (std::vector<double>{20.0, 40.0}));
}

TEST(Config, RenderRoundTripAndHash) {
  const auto a = parse_config(kSmall);
  const auto b = parse_config(render_config(a.echo));
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.hash(), b.hash());
  auto edited = std::string(kSmall);
  edited.replace(edited.find("eps = 0.4"), 9, "eps = 0.35");
  EXPECT_NE(parse_config(edited).hash(), a.hash());
  // Comments and spacing do not change the canonical text.
  EXPECT_EQ(parse_config("# x\n" + std::string(kSmall) + "\n\n").hash(), a.hash());
}

TEST(Config, ErrorsNameTheLineAndKey) {
  const std::string unknown = config_error("[grid]\nnr = 64\nfoo = 1\n");
  EXPECT_NE(unknown.find("cfg:3"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("foo"), std::string::npos) << unknown;
  EXPECT_NE(config_error("[nonsense]\n").find("cfg:1"), std::string::npos);
  const std::string bad = config_error(std::string(kSmall).replace(std::string(kSmall).find("nr = 64"), 7, "nr = x"));
  EXPECT_NE(bad.find("nr"), std::string::npos) << bad;
  EXPECT_FALSE(config_error("[grid]\nnr\n").empty());
  EXPECT_FALSE(config_error(std::string(kSmall) + "[run]\nboundary = sideways\n").empty());
  EXPECT_FALSE(config_error(std::string(kSmall) + "[run]\ncfl_advect = 2\n").empty());
}

TEST(Config, MixedSignRingsAreRejected) {
  const std::string second = "[ring]\nkappa = -1\nr0 = 2\nz0 = 1\neps = 0.4\n";
  const std::string err = config_error(std::string(kSmall) + second);
  EXPECT_NE(err.find("sign"), std::string::npos) << err;
  const auto ok = parse_config(std::string(kSmall) + "[ring]\nkappa = 2\nr0 = 2\nz0 = 1\neps = 0.4\n");
  EXPECT_EQ(ok.sim.rings.size(), 2u);
}

TEST(Config, SnapshotMerge) {
  const auto t = merge_snapshot_times({0.3, 0.1, 0.7}, 0.25, 0.001, 0.1, 3, 0.5);
  EXPECT_EQ(t, (std::vector<double>{0.001, 0.01, 0.1, 0.25, 0.3, 0.5}));
  EXPECT_TRUE(merge_snapshot_times({}, 0.0, 0.0, 0.0, 0, 0.5).empty());
}

TEST(Config, SweepSection) {
  const auto cfg = parse_config(std::string(kSmall) +
                                "[sweep]\nkappa = 0.5, 1\neps = 0.4\ngrid = 64x96, 128x192\n"
                                "grid_policy = coarsest-valid\n");
  EXPECT_EQ(cfg.sweep.kappa, (std::vector<double>{0.5, 1.0}));
  ASSERT_EQ(cfg.sweep.grids.size(), 2u);
  EXPECT_EQ(cfg.sweep.grids[1], (std::pair<int, int>{128, 192}));
  EXPECT_EQ(cfg.sweep.grid_policy, GridPolicy::kCoarsestValid);
  EXPECT_FALSE(config_error(std::string(kSmall) + "[sweep]\ngrid = 64by96\n").empty());
}

TEST_F(Scratch, SimulateWritesACompleteRunDirectory) {
  std::ostringstream log;
  const auto cfg = parse_config(kSmall);
  const auto sim = simulate_config(cfg, dir_, log);
  EXPECT_EQ(sim.exit_code, kExitOk) << log.str();
  for (const char* f : {"config.ini", "diagnostics.csv", "reports.jsonl", "manifest.json"})
    EXPECT_TRUE(fs::exists(sim.run_dir / f)) << f;
  const auto manifest = json::parse(read_file(sim.manifest));
  EXPECT_EQ(manifest["config"].get<std::string>(), cfg.text);
  const auto snaps = manifest["snapshots"].size();
  EXPECT_EQ(snaps, 11u);
  const auto csv = read_file(sim.run_dir / "diagnostics.csv");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), snaps + 1);
  EXPECT_EQ(read_file(sim.run_dir / "config.ini"), cfg.text);
  EXPECT_EQ(sim.run_dir.filename().string().substr(0, 16).size(), 16u);
}

TEST_F(Scratch, ZeroEndTimeKeepsOnlyTheInitialSnapshot) {
  std::ostringstream log;
  auto text = std::string(kSmall);
  text.replace(text.find("t_end = 0.02"), 12, "t_end = 0");
  text.replace(text.find("every = 0.002"), 13, "");
  const auto sim = simulate_config(parse_config(text), dir_, log);
  EXPECT_EQ(sim.exit_code, kExitOk) << log.str();
  EXPECT_EQ(json::parse(read_file(sim.manifest))["snapshots"].size(), 1u);
}

TEST_F(Scratch, IdenticalConfigsGiveIdenticalDiagnostics) {
  std::ostringstream log;
  const auto cfg = parse_config(kSmall);
  const auto a = simulate_config(cfg, dir_ / "a", log);
  const auto b = simulate_config(cfg, dir_ / "b", log);
  EXPECT_EQ(read_file(a.run_dir / "diagnostics.csv"), read_file(b.run_dir / "diagnostics.csv"));
  EXPECT_EQ(read_file(a.run_dir / "reports.jsonl"), read_file(b.run_dir / "reports.jsonl"));
  EXPECT_EQ(read_file(a.run_dir / "snapshots" / "eta_00010.bin"),
            read_file(b.run_dir / "snapshots" / "eta_00010.bin"));
}

TEST_F(Scratch, SimulateUsageErrors) {
  std::ostringstream log;
  EXPECT_EQ(cmd_simulate((dir_ / "missing.ini").string(), dir_, log), kExitUsage);
  const auto bad = write("bad.ini", std::string(kSmall) + "[ring]\nkappa = -1\nr0 = 2\nz0 = 1\neps = 0.4\n");
  EXPECT_EQ(cmd_simulate(bad.string(), dir_, log), kExitUsage);
  EXPECT_NE(log.str().find("config error"), std::string::npos);
}

TEST_F(Scratch, VerifySuitesOnASmallRun) {
  std::ostringstream log;
  const auto sim = simulate_config(parse_config(kSmall), dir_, log);
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(sim.manifest, "interpolation", out), kExitOk) << out.str();
  EXPECT_TRUE(fs::exists(sim.run_dir / "verify_interpolation.jsonl"));
  const auto v = verify_manifest(sim.manifest, "interpolation", out);
  ASSERT_FALSE(v.reports.empty());
  for (const auto& r : v.reports) EXPECT_LE(r.ratio, 1.0 + kInterpolationSlack) << r.name;
  EXPECT_EQ(cmd_verify(sim.manifest, "decay", out), kExitOk) << out.str();
  EXPECT_NE(out.str().find("eta_linf"), std::string::npos);
  EXPECT_EQ(cmd_verify(sim.manifest, "bogus", out), kExitUsage);
}

TEST_F(Scratch, VerifyReportsBadSnapshotsAsIoErrors) {
  std::ostringstream log;
  const auto sim = simulate_config(parse_config(kSmall), dir_, log);
  const auto snap = sim.run_dir / "snapshots" / "eta_00003.bin";
  ASSERT_TRUE(fs::exists(snap));
  {
    std::fstream f(snap, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(sim.manifest, "interpolation", out), kExitUsage);
  EXPECT_NE(out.str().find("io error"), std::string::npos) << out.str();
  fs::remove(snap);
  std::ostringstream out2;
  EXPECT_EQ(cmd_verify(sim.manifest, "interpolation", out2), kExitUsage);
  EXPECT_NE(out2.str().find("eta_00003.bin"), std::string::npos) << out2.str();
  std::ostringstream out3;
  EXPECT_EQ(cmd_verify(dir_ / "nope.json", "all", out3), kExitUsage);
}

TEST_F(Scratch, EmptySweepIsAUsageError) {
  const auto cfg = write("plain.ini", kSmall);
  std::ostringstream out;
  EXPECT_EQ(cmd_sweep(cfg.string(), dir_, 1, out), kExitUsage);
}

TEST(KernelTableCommand, RowsAndUsageErrors) {
  std::ostringstream one;
  EXPECT_EQ(cmd_kernel_table(1.0, 1.0, 1, one), kExitOk);
  const auto text = one.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  std::ostringstream many;
  EXPECT_EQ(cmd_kernel_table(1e-4, 1e4, 200, many), kExitOk);
  const auto big = many.str();
  EXPECT_EQ(std::count(big.begin(), big.end(), '\n'), 201);
  std::ostringstream bad;
  EXPECT_EQ(cmd_kernel_table(-1.0, 1.0, 10, bad), kExitUsage);
  EXPECT_EQ(cmd_kernel_table(2.0, 1.0, 10, bad), kExitUsage);
  EXPECT_EQ(cmd_kernel_table(1.0, 2.0, 0, bad), kExitUsage);
}

}  // namespace
