#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spot/generators.hpp"
#include "spot/harness/experiment.hpp"
#include "spot/harness/plotdata.hpp"

using namespace spot;
using namespace spot::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("spot_exp_" +
             std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  static ExperimentConfig small() {
    ExperimentConfig cfg;
    cfg.model.kind = ModelSource::Kind::chain;
    cfg.model.chain = {3, 4, 1};
    cfg.episodes = 40;
    cfg.workers = 1;
    return cfg;
  }

  fs::path root_;
};

}  // namespace

TEST(GridPoint, NamesAreStable) {
  EXPECT_EQ((GridPoint{3, ThresholdMode::pessimistic, 0.5, 0.0}.name()), "pessimistic_g0.5_s3");
  EXPECT_EQ((GridPoint{0, ThresholdMode::blended, 1.0, 0.25}.name()), "blended-xi0.25_g1_s0");
}

TEST(ExpandGrid, OrderAndSize) {
  ExperimentConfig cfg;
  cfg.seeds = {1, 2};
  cfg.modes = {ThresholdMode::pessimistic, ThresholdMode::blended};
  cfg.gammas = {0.5, 1.0};
  cfg.xis = {0.0, 0.5, 1.0};
  const auto grid = expand_grid(cfg, 10);
  ASSERT_EQ(grid.size(), 2u * (1 + 3) * 2);
  EXPECT_EQ(grid[0].seed, 11u);
  EXPECT_EQ(grid[1].seed, 12u);
  EXPECT_EQ(grid[2].mode, ThresholdMode::blended);
  EXPECT_EQ(grid[2].xi, 0.0);
  EXPECT_EQ(grid[8].gamma, 1.0);
}

TEST(ModelFactsTest, ChainFacts) {
  const auto facts = model_facts(make_chain_cmdp(5, 6, 1), std::nullopt);
  EXPECT_NEAR(facts.alpha[0], 4.5, 1e-12);
  EXPECT_NEAR(facts.optimal_reward, 1.5, 1e-9);
  EXPECT_NEAR(facts.rho, 1.0, 1e-9);
  EXPECT_EQ(model_facts(make_chain_cmdp(5, 6, 1), 3.0).rho, 3.0);
  EXPECT_EQ(model_facts(make_chain_cmdp(5, 6, 0), std::nullopt).rho, 1.0);
}

TEST(Fmt, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 6.0}) EXPECT_EQ(std::stod(fmt(v)), v);
  EXPECT_EQ(fmt(std::nan("")), "nan");
}

TEST_F(ExperimentTest, SinglePointWritesOneLogAndOneRow) {
  const auto summary = run_experiment(small(), {0, root_});
  ASSERT_EQ(summary.rows.size(), 1u);
  EXPECT_TRUE(summary.rows[0].ok) << summary.rows[0].error;
  EXPECT_EQ(summary.failures(), 0u);
  EXPECT_TRUE(fs::exists(root_ / "model.json"));
  const auto log = slurp(root_ / "log_pessimistic_g0.5_s0.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')),
            "t,V_r,V_g_1,alpha_mode_1,lambda_1,cum_regret,cum_violation,breaches");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 41);
  const auto table = slurp(root_ / "summary.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), kSummaryHeader);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);
  std::size_t logs = 0;
  for (const auto& entry : fs::directory_iterator(root_))
    logs += entry.path().filename().string().rfind("log_", 0) == 0;
  EXPECT_EQ(logs, 1u);
}

TEST_F(ExperimentTest, RerunIsByteIdenticalAndWorkerCountFree) {
  auto cfg = small();
  cfg.seeds = {0, 1, 2};
  cfg.modes = {ThresholdMode::pessimistic, ThresholdMode::optimistic};
  run_experiment(cfg, {0, root_ / "a"});
  run_experiment(cfg, {0, root_ / "b"});
  cfg.workers = 3;
  run_experiment(cfg, {0, root_ / "c"});
  for (const auto& entry : fs::directory_iterator(root_ / "a")) {
    const auto name = entry.path().filename();
    SCOPED_TRACE(name.string());
    EXPECT_EQ(slurp(entry.path()), slurp(root_ / "b" / name));
    EXPECT_EQ(slurp(entry.path()), slurp(root_ / "c" / name));
  }
}

TEST_F(ExperimentTest, FailingPointIsIsolated) {
  auto cfg = small();
  cfg.seeds = {0, 1};
  fs::create_directories(root_);
  // A directory squatting on the temp file makes seed 1's log unwritable.
  fs::create_directories(root_ / "log_pessimistic_g0.5_s1.csv.tmp");
  const auto summary = run_experiment(cfg, {0, root_});
  ASSERT_EQ(summary.rows.size(), 2u);
  EXPECT_TRUE(summary.rows[0].ok);
  EXPECT_FALSE(summary.rows[1].ok);
  EXPECT_FALSE(summary.rows[1].error.empty());
  EXPECT_EQ(summary.failures(), 1u);
  EXPECT_TRUE(fs::exists(root_ / "log_pessimistic_g0.5_s0.csv"));
  EXPECT_FALSE(fs::exists(root_ / "log_pessimistic_g0.5_s1.csv"));
  EXPECT_NE(slurp(root_ / "summary.csv").find(",failed,"), std::string::npos);
}

TEST_F(ExperimentTest, SeedOffsetShiftsSeeds) {
  const auto summary = run_experiment(small(), {5, root_});
  EXPECT_EQ(summary.rows[0].point.seed, 5u);
  EXPECT_TRUE(fs::exists(root_ / "log_pessimistic_g0.5_s5.csv"));
}

TEST_F(ExperimentTest, OutputRootEnvironmentAnchorsRelativeDirs) {
  auto cfg = small();
  cfg.output_dir = "rel";
  ::setenv(kOutputRootEnv, root_.c_str(), 1);
  const auto summary = run_experiment(cfg);
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(summary.output_dir, root_ / "rel");
  EXPECT_TRUE(fs::exists(root_ / "rel" / "summary.csv"));
}

TEST_F(ExperimentTest, SnapshotsAreWrittenOnRequest) {
  auto cfg = small();
  cfg.emit_snapshots = true;
  run_experiment(cfg, {0, root_});
  EXPECT_TRUE(fs::exists(root_ / "snapshot_pessimistic_g0.5_s0.csv"));
}

TEST_F(ExperimentTest, LogFeedsPlotData) {
  run_experiment(small(), {0, root_});
  std::ifstream in(root_ / "log_pessimistic_g0.5_s0.csv");
  const auto data = read_plot_data(in);
  EXPECT_EQ(data.t.size(), 40u);
  EXPECT_EQ(data.t.back(), 40);
}

TEST_F(ExperimentTest, MatchesGoldenLog) {
  const auto cfg = parse_config(fs::path(SPOT_CONFIG_DIR) / "golden.yaml");
  run_experiment(cfg, {0, root_});
  for (const char* name : {"log_pessimistic_g0.5_s0.csv", "snapshot_pessimistic_g0.5_s0.csv",
                           "summary.csv", "model.json"}) {
    SCOPED_TRACE(name);
    const auto golden = fs::path(SPOT_GOLDEN_DIR) / name;
    ASSERT_TRUE(fs::exists(golden));
    EXPECT_EQ(slurp(root_ / name), slurp(golden));
  }
}
