#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "urbancp/commands.hpp"

using namespace urbancp;
using namespace urbancp::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("urbancp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    cfg_.output_dir = dir_.string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  // Small noiseless planted tensor plus its POIs and matching grid.
  void synth(Index regions = 6, Index horizon = 96, double noise = 0.0) {
    cfg_.synth.regions = regions;
    cfg_.synth.horizon = horizon;
    cfg_.synth.rank = 2;
    cfg_.synth.blocks = 2;
    cfg_.synth.noise = noise;
    cfg_.synth.pois_per_region = 20;
    const auto s = cmd_synth(cfg_);
    apply_config_file(cfg_, s.grid_config);
  }

  fs::path dir_;
  RunConfig cfg_;
  std::ostringstream log_;
};

struct Run {
  int code;
  std::string out;
};

Run run_tool(const std::string& args) {
  const std::string cmd = std::string(URBANCP_CLI_PATH) + " " + args + " 2>&1";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  std::array<char, 512> buf{};
  while (pipe && fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pipe ? pclose(pipe) : -1;
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& file) {
  std::ifstream is(file);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::string without_wall(const ResultRow& r) {
  ResultRow c = r;
  c.wall_seconds = 0;
  return c.csv();
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndOverrides) {
  RunConfig cfg;
  std::istringstream in(
      "# experiment\n"
      "solver.rank = 4   # trailing comment\n"
      "solver.lambda=0.5\n"
      "\n"
      "mask.kind = structured\n"
      "sweep.rates = 0.6, 0.8\n"
      "urban.transport_categories = bus, metro\n"
      "tensor.mode = source_to_destination\n");
  apply_config(cfg, in);
  EXPECT_EQ(cfg.solver.rank, 4);
  EXPECT_EQ(cfg.solver.lambda, 0.5);
  EXPECT_EQ(cfg.mask_kind, "structured");
  EXPECT_EQ(cfg.sweep_rates, (std::vector<double>{0.6, 0.8}));
  EXPECT_EQ(cfg.transport, (std::set<std::string>{"bus", "metro"}));
  EXPECT_EQ(cfg.build_mode, TensorBuildMode::SourceToDestination);
  EXPECT_EQ(cfg.effective_beta(), 0.01);
  set_config_value(cfg, "solver.rank", "7");
  EXPECT_EQ(cfg.solver.rank, 7);
}

TEST(Config, DefaultsMatchExperimentSettings) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.solver.lambda, 0.1);
  EXPECT_EQ(cfg.solver.beta, 0.1);
  EXPECT_EQ(cfg.structured_beta, 0.01);
  EXPECT_EQ(cfg.solver.tol, 1e-6);
  EXPECT_EQ(cfg.sampen.m, 3);
  EXPECT_EQ(cfg.sampen.th, 0.3);
}

TEST(Config, RejectsBadInput) {
  RunConfig cfg;
  EXPECT_THROW(set_config_value(cfg, "solver.rnak", "3"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "solver.rank", "three"), ConfigError);
  EXPECT_THROW(set_config_value(cfg, "mask.kind", "diagonal"), ConfigError);
  std::istringstream in("solver.rank 3\n");
  EXPECT_THROW(apply_config(cfg, in), ConfigError);
  cfg.mask_rate = 1.0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST_F(CliTest, BuildTensorHandTrace) {
  // three samples of one taxi in consecutive hourly bins, all in the same cell
  write("traj.csv",
        "7,2008-02-02 10:05:00,-8.61,41.16\n"
        "7,2008-02-02 11:05:00,-8.61,41.16\n"
        "this,is,not,valid\n"
        "7,2008-02-02 12:05:00,-8.61,41.16\n");
  cfg_.trajectories = path("traj.csv");
  cfg_.horizon = 4;
  const auto s = cmd_build_tensor(cfg_, log_);
  EXPECT_EQ(s.malformed_rows, 1u);
  EXPECT_EQ(s.sum, 2.0);
  const Tensor3 x = io::read_tensor(cfg_.tensor_path());
  const GridSpec g = grid_segment(cfg_.bbox, cfg_.cell_size_km);
  const Index r = *assign_region(41.16, -8.61, g);
  EXPECT_EQ(x.dims(), (Dims{g.regions(), g.regions(), 4}));
  EXPECT_EQ(x(r, r, 0), 1.0);
  EXPECT_EQ(x(r, r, 1), 1.0);
  EXPECT_TRUE(fs::exists(path("build_report.json")));
}

TEST_F(CliTest, BuildTensorEmptyFileGivesZeroTensor) {
  write("empty.csv", "");
  cfg_.trajectories = path("empty.csv");
  const auto s = cmd_build_tensor(cfg_, log_);
  EXPECT_EQ(s.sum, 0.0);
  EXPECT_NE(log_.str().find("warning"), std::string::npos);
  cfg_.trajectories = path("absent.csv");
  EXPECT_THROW(cmd_build_tensor(cfg_, log_), IoError);
}

TEST_F(CliTest, ContextIdenticalRegionsAndPlantedPeriod) {
  synth();
  cfg_.mask_kind = "none";
  const auto s = cmd_context(cfg_, log_);
  EXPECT_EQ(s.temporal.ctx.period, 24);
  EXPECT_FALSE(s.temporal.ctx.fallback);
  EXPECT_FALSE(s.urban.inert);
  EXPECT_EQ(s.urban.u.rows(), 6);

  // overwrite the POIs so regions 0 and 1 carry the same mix
  const GridSpec g = grid_segment(cfg_.bbox, cfg_.cell_size_km);
  std::ostringstream poi;
  poi << "lat,lon,category\n";
  for (Index region : {0, 1}) {
    const double lat = g.bbox.lat_min + 0.5 * g.cell_size_km / kKmPerDegLat;
    const double lon = g.bbox.lon_min + (region + 0.5) * g.cell_size_km / g.km_per_deg_lon();
    for (const char* c : {"food", "food", "parking"}) poi << fmt(lat) << ',' << fmt(lon) << ',' << c << '\n';
  }
  write("same.csv", poi.str());
  cfg_.pois = path("same.csv");
  EXPECT_EQ(cmd_context(cfg_, log_).urban.u(0, 1), 1.0);
  EXPECT_EQ(io::read_matrix_csv(path("urban.csv"))(0, 1), 1.0);
  EXPECT_EQ(io::read_matrix_csv(path("temporal.csv")).rows(), 96);
}

TEST_F(CliTest, ContextWithoutPoisIsInert) {
  synth();
  cfg_.pois.clear();
  const auto s = cmd_context(cfg_, log_);
  EXPECT_TRUE(s.urban.inert);
  EXPECT_EQ(s.urban.u.norm(), 0.0);
  EXPECT_NE(log_.str().find("no POI file"), std::string::npos);
}

TEST_F(CliTest, CompleteExactRankAndDeterministicRows) {
  synth(6, 48, 0.0);
  cfg_.mask_kind = "none";
  cfg_.solver.rank = 2;
  cfg_.solver.lambda = cfg_.solver.beta = 1e-9;
  cfg_.solver.tol = 1e-14;
  const auto a = cmd_complete(cfg_, log_);
  EXPECT_LE(*a.row.re, 1e-4);
  EXPECT_EQ(a.row.method, "augmented");
  const auto b = cmd_complete(cfg_, log_);
  EXPECT_EQ(without_wall(a.row), without_wall(b.row));
  EXPECT_EQ(lines(cfg_.results_path()).size(), 3u);
  EXPECT_EQ(lines(cfg_.results_path())[0], ResultRow::kHeader);
  EXPECT_TRUE(fs::exists(path("xhat.bin")));
}

TEST_F(CliTest, CompleteWithMissingValues) {
  synth(6, 48, 0.05);
  cfg_.mask_rate = 0.6;
  cfg_.solver.max_iters = 20;
  const auto r = cmd_complete(cfg_, log_);
  ASSERT_TRUE(r.row.re);
  EXPECT_GE(*r.row.re, 0.0);
  EXPECT_EQ(r.row.mask_kind, "random");
  const auto parsed = ResultRow::parse(lines(cfg_.results_path()).back());
  EXPECT_EQ(parsed.csv(), r.row.csv());
}

TEST_F(CliTest, SweepCountsAndResumes) {
  synth(4, 48, 0.05);
  cfg_.sweep_rates = {0.2, 0.4};
  cfg_.sweep_ranks = {1, 2};
  cfg_.sweep_seeds = {3};
  cfg_.solver.max_iters = 5;
  const auto first = cmd_sweep(cfg_, log_);
  EXPECT_EQ(first.ran, 8u);
  EXPECT_EQ(first.skipped, 0u);
  const auto rows = read_results(first.results);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.method == "baseline"; }), 4);
  for (const auto& r : rows) EXPECT_EQ(r.beta == 0.0, r.method == "baseline");

  const auto second = cmd_sweep(cfg_, log_);
  EXPECT_EQ(second.ran, 0u);
  EXPECT_EQ(second.skipped, 8u);
  EXPECT_EQ(read_results(first.results).size(), 8u);
  EXPECT_EQ(lines(first.summary).size(), 1u + 8u);
}

TEST_F(CliTest, SweepRecordsFailuresAndContinues) {
  synth(4, 48, 0.05);
  cfg_.sweep_kinds = {"structured", "random"};
  cfg_.sweep_rates = {0.9};
  cfg_.mask_duration = 12;  // 0.9 of 48 bins cannot be blanked with 12-bin windows
  cfg_.solver.max_iters = 3;
  const auto s = cmd_sweep(cfg_, log_);
  EXPECT_EQ(s.failed, 2u);
  EXPECT_EQ(s.ran, 2u);
  const auto rows = read_results(s.results);
  EXPECT_EQ(rows[0].status, "failed:config");
  EXPECT_FALSE(rows[0].re);
}

TEST_F(CliTest, ToolEndToEnd) {
  const std::string out = "--paths.output_dir " + dir_.string();
  auto r = run_tool("synth " + out + " --synth.regions 4 --synth.horizon 96 --synth.rank 2");
  ASSERT_EQ(r.code, 0) << r.out;
  r = run_tool("context " + out + " -c " + path("grid.conf") + " --mask.kind none");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"period\":24"), std::string::npos) << r.out;
  r = run_tool("complete " + out + " -c " + path("grid.conf") + " --solver.rank 2 --solver.max_iters 10");
  ASSERT_EQ(r.code, 0) << r.out;
  r = run_tool("eval " + path("tensor.bin") + " " + path("xhat.bin"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"re\":"), std::string::npos);
}

TEST_F(CliTest, ToolOutputDirFromEnvironment) {
  setenv(kOutputDirEnv, dir_.c_str(), 1);
  const auto s = run_tool("synth --synth.regions 4 --synth.horizon 48");
  unsetenv(kOutputDirEnv);
  ASSERT_EQ(s.code, 0) << s.out;
  EXPECT_TRUE(fs::exists(path("tensor.bin")));
}

TEST_F(CliTest, ToolErrorsAreMachineParsable) {
  auto r = run_tool("complete --paths.tensor " + path("nope.bin"));
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.out.rfind("error:io: ", 0), 0u) << r.out;

  r = run_tool("complete --solver.rank abc");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out.rfind("error:config: ", 0), 0u) << r.out;

  r = run_tool("frobnicate");
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.out.rfind("error:usage: ", 0), 0u) << r.out;

  EXPECT_EQ(run_tool("--help").code, 0);
}
