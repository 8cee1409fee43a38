#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "spot/harness/config.hpp"

using namespace spot;
using namespace spot::harness;

namespace {

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigValidationError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& i : issues)
    if (i.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Config, MinimalConfigTakesDefaults) {
  const auto cfg = parse_config_string("model: {generator: chain}\n");
  EXPECT_EQ(cfg.model.kind, ModelSource::Kind::chain);
  EXPECT_EQ(cfg.model.chain.length, 5);
  EXPECT_EQ(cfg.episodes, 1000);
  EXPECT_EQ(cfg.delta, 0.05);
  EXPECT_FALSE(cfg.rho.has_value());
  EXPECT_EQ(cfg.seeds, std::vector<std::uint64_t>{0});
  EXPECT_EQ(cfg.modes, std::vector<ThresholdMode>{ThresholdMode::pessimistic});
  EXPECT_EQ(cfg.gammas, std::vector<double>{0.5});
  EXPECT_TRUE(cfg.emit_logs);
  EXPECT_FALSE(cfg.emit_snapshots);
}

TEST(Config, FullConfigIsRead) {
  const auto cfg = parse_config_string(R"(
model:
  generator: random
  states: 4
  actions: 2
  horizon: 3
  constraints: 1
  min_slack: 0.2
  seed: 9
episodes: 50
delta: 0.1
rho: 2.5
eta_policy: 0.01
eta_dual: 30
disable_confidence: true
seeds: [3, 4]
modes: [optimistic, blended]
gammas: [1]
xis: [0, 1]
workers: 2
output: {directory: out, logs: false, snapshots: true}
)");
  EXPECT_EQ(cfg.model.kind, ModelSource::Kind::random);
  EXPECT_EQ(cfg.model.random.states, 4);
  EXPECT_EQ(cfg.model.random.seed, 9u);
  EXPECT_EQ(cfg.model.random.min_slack, 0.2);
  EXPECT_EQ(cfg.episodes, 50);
  EXPECT_EQ(cfg.rho, 2.5);
  EXPECT_EQ(cfg.eta_policy, 0.01);
  EXPECT_EQ(cfg.eta_dual, 30.0);
  EXPECT_TRUE(cfg.disable_confidence);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(cfg.xis, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(cfg.workers, 2u);
  EXPECT_EQ(cfg.output_dir, "out");
  EXPECT_FALSE(cfg.emit_logs);
  EXPECT_TRUE(cfg.emit_snapshots);
}

TEST(Config, RhoAutoStaysUnset) {
  EXPECT_FALSE(parse_config_string("model: {generator: chain}\nrho: auto\n").rho.has_value());
}

TEST(Config, GammaOutOfRangeIsRejected) {
  const auto issues = issues_of("model: {generator: chain}\ngammas: [0.5, 0]\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_TRUE(mentions(issues, "γ must lie in (0,1]"));
  EXPECT_TRUE(mentions(issues, "gammas[1]"));
}

TEST(Config, DuplicateSeedsAreRejected) {
  EXPECT_TRUE(mentions(issues_of("model: {generator: chain}\nseeds: [1, 2, 1]\n"),
                       "seeds must be distinct"));
}

TEST(Config, UnknownKeyReportsItsLine) {
  const auto issues = issues_of("model: {generator: chain}\nepisodes: 10\nepisdoes: 5\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_TRUE(mentions(issues, "unknown key"));
  EXPECT_TRUE(mentions(issues, "line 3"));
}

TEST(Config, TypeErrorReportsItsLine) {
  const auto issues = issues_of("model: {generator: chain}\n\nepisodes: many\n");
  EXPECT_TRUE(mentions(issues, "expected integer, got 'many'"));
  EXPECT_TRUE(mentions(issues, "line 3"));
}

TEST(Config, AllProblemsAreReportedTogether) {
  const auto issues =
      issues_of("model: {generator: chain}\ndelta: 2\nrho: -1\nxis: [3]\nepisodes: 0\n");
  EXPECT_EQ(issues.size(), 4u);
  EXPECT_TRUE(mentions(issues, "δ must lie in (0,1)"));
  EXPECT_TRUE(mentions(issues, "ρ must be > 0"));
  EXPECT_TRUE(mentions(issues, "ξ must lie in [0,1]"));
  EXPECT_TRUE(mentions(issues, "episodes must be >= 1"));
}

TEST(Config, MissingModelIsRejected) { EXPECT_TRUE(mentions(issues_of("episodes: 5\n"), "model")); }

TEST(Config, UnknownModeIsRejected) {
  EXPECT_TRUE(mentions(issues_of("model: {generator: chain}\nmodes: [greedy]\n"), "greedy"));
}

TEST(Config, FileModelResolvesAgainstConfigDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "spot_config_test";
  std::filesystem::create_directories(dir / "sub");
  {
    std::ofstream(dir / "sub" / "exp.yaml") << "model: {file: m.json}\n";
  }
  const auto cfg = parse_config(dir / "sub" / "exp.yaml");
  EXPECT_EQ(cfg.model.kind, ModelSource::Kind::file);
  EXPECT_EQ(std::filesystem::path(cfg.model.path), dir / "sub" / "m.json");
  std::filesystem::remove_all(dir);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(parse_config("/nonexistent/exp.yaml"), ConfigError);
}

TEST(Config, SampleConfigsParse) {
  for (const char* name : {"chain.yaml", "random_small.yaml", "golden.yaml"}) {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(parse_config(std::filesystem::path(SPOT_CONFIG_DIR) / name));
  }
}

TEST(Config, BuildModelIsReproducible) {
  const auto cfg = parse_config_string(
      "model: {generator: random, states: 3, actions: 2, "
      "horizon: 3, constraints: 1, min_slack: 0.1, seed: 4}\n");
  EXPECT_EQ(build_model(cfg.model), build_model(cfg.model));
}
