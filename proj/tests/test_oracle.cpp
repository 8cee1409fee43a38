#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "spot/generators.hpp"
#include "spot/oracle.hpp"
#include "test_support.hpp"

using namespace spot;

namespace {

/// Best reward over mixtures of at most two deterministic policies meeting
/// V_g >= alpha (single constraint). With one constraint an optimal vertex
/// of the occupancy polytope mixes at most two deterministic policies.
double best_pair_mixture(const std::vector<EnumeratedPolicy>& pols, double alpha) {
  double best = -1e300;
  for (const auto& p : pols)
    if (p.values.cost[0] >= alpha) best = std::max(best, p.values.reward);
  for (const auto& a : pols)
    for (const auto& b : pols) {
      const double ga = a.values.cost[0], gb = b.values.cost[0];
      if (!(ga >= alpha && gb < alpha)) continue;
      // theta*ga + (1-theta)*gb = alpha
      const double theta = (alpha - gb) / (ga - gb);
      best = std::max(best, theta * a.values.reward + (1 - theta) * b.values.reward);
    }
  return best;
}

CmdpModel permute_states(const CmdpModel& m, const std::vector<int>& perm) {
  CmdpModel out = m;
  out.initial_state = perm[m.initial_state];
  for (int h = 0; h < m.horizon; ++h)
    for (int s = 0; s < m.num_states; ++s)
      for (int a = 0; a < m.num_actions; ++a) {
        out.reward_mean(h, perm[s], a) = m.reward_mean(h, s, a);
        for (int i = 0; i < m.num_constraints; ++i)
          out.cost_mean[i](h, perm[s], a) = m.cost_mean[i](h, s, a);
        for (int n = 0; n < m.num_states; ++n)
          out.transition(h, perm[s], a, perm[n]) = m.transition(h, s, a, n);
      }
  return out;
}

}  // namespace

TEST(SolveOptimalOccupancy, UnconstrainedEqualsBellmanOptimum) {
  RngStream rng(41, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = fixtures::random_model(3, 2, 3, 0, rng);
    const auto lp = solve_optimal_occupancy(m, {});
    ASSERT_TRUE(lp.optimal());
    EXPECT_NEAR(lp.objective, optimal_value(m.transition, 0, m.reward_mean).value, 1e-9);
  }
}

TEST(SolveOptimalOccupancy, ThresholdAboveHorizonIsInfeasible) {
  const auto m = fixtures::tiny_model();
  EXPECT_EQ(solve_optimal_occupancy(m, {2.5}).status, lp::Status::infeasible);
}

TEST(SolveOptimalOccupancy, TinyInstanceMatchesPairMixtureSearch) {
  const auto m = fixtures::tiny_model();
  const auto pols = enumerate_deterministic_policies(m);
  ASSERT_EQ(pols.size(), 16u);
  for (double alpha : {0.5, 0.9, 1.2, 1.4}) {
    const auto lp = solve_optimal_occupancy(m, {alpha});
    ASSERT_TRUE(lp.optimal()) << alpha;
    EXPECT_NEAR(lp.objective, best_pair_mixture(pols, alpha), 1e-9) << alpha;
  }
}

TEST(SolveOptimalOccupancy, OptimalOccupancyIsValidAndFeasible) {
  RngStream rng(42, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = fixtures::random_model(3, 2, 3, 1, rng);
    const auto alpha = 0.8 * exact_value(m, Policy::uniform(3, 3, 2), m.cost_mean[0]);
    const auto lp = solve_optimal_occupancy(m, {alpha});
    ASSERT_TRUE(lp.optimal());
    EXPECT_GE(inner(m.cost_mean[0], lp.occupancy), alpha - 1e-8);
    for (double v : lp.occupancy.mass.values()) EXPECT_GE(v, -1e-9);
    // The induced policy realizes the LP value.
    const auto pi = policy_of_occupancy(lp.occupancy);
    EXPECT_NEAR(exact_value(m, pi, m.reward_mean), lp.objective, 1e-8);
    EXPECT_GE(lp.multipliers[0], -1e-12);
  }
}

TEST(SolveOptimalOccupancy, StrongDualityCertificate) {
  RngStream rng(43, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = fixtures::random_model(2 + trial % 3, 2, 2 + trial % 3, 1, rng);
    const double alpha =
        0.9 * exact_value(m, Policy::uniform(m.horizon, m.num_states, 2), m.cost_mean[0]);
    const auto lp = solve_optimal_occupancy(m, {alpha});
    ASSERT_TRUE(lp.optimal());
    EXPECT_LE(std::abs(lp.objective - lp.dual_value), 1e-7);
    EXPECT_LE(lp.dual_infeasibility, 1e-9);
    // D(lambda*) computed independently by DP.
    EXPECT_NEAR(lagrangian_dual_value(m, lp.multipliers, {alpha}), lp.objective, 1e-7);
  }
}

TEST(SolveOptimalOccupancy, BoundaryThresholdIsFeasible) {
  const auto m = fixtures::tiny_model();
  const double top = optimal_value(m.transition, 0, m.cost_mean[0]).value;
  const auto lp = solve_optimal_occupancy(m, {top});
  ASSERT_TRUE(lp.optimal());
  EXPECT_NEAR(inner(m.cost_mean[0], lp.occupancy), top, 1e-9);
}

TEST(SolveOptimalOccupancy, InvariantUnderStatePermutation) {
  RngStream rng(44, 0);
  const auto m = fixtures::random_model(4, 2, 3, 1, rng);
  const double alpha = exact_value(m, Policy::uniform(3, 4, 2), m.cost_mean[0]);
  const auto base = solve_optimal_occupancy(m, {alpha});
  const auto perm = solve_optimal_occupancy(permute_states(m, {2, 0, 3, 1}), {alpha});
  ASSERT_TRUE(base.optimal() && perm.optimal());
  EXPECT_NEAR(base.objective, perm.objective, 1e-9);
}

TEST(SolveOptimalOccupancy, FeasibleSetsNestByThreshold) {
  RngStream rng(45, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = fixtures::random_model(3, 3, 3, 1, rng);
    const double alpha = exact_value(m, Policy::uniform(3, 3, 3), m.cost_mean[0]);
    const auto tight = solve_optimal_occupancy(m, {alpha + 0.2});
    const auto mid = solve_optimal_occupancy(m, {alpha});
    const auto loose = solve_optimal_occupancy(m, {alpha - 0.2});
    ASSERT_TRUE(mid.optimal() && loose.optimal());
    if (tight.optimal()) EXPECT_LE(tight.objective, mid.objective + 1e-9);
    EXPECT_LE(mid.objective, loose.objective + 1e-9);
  }
}

TEST(SlaterGap, UniformOverSatisfactionGivesThatSlack) {
  // Costs are 1 everywhere, so every policy has V_g = H = 2 against alpha = 1.5.
  auto m = fixtures::tiny_model();
  for (auto& g : m.cost_mean[0].values()) g = 1.0;
  m.threshold_mean = {{0.75, 0.75}};
  const auto report = slater_gap(m, m.episodic_thresholds());
  EXPECT_NEAR(report.max_min_slack, 0.5, 1e-9);
  EXPECT_NEAR(report.slack[0], 0.5, 1e-9);
  // Every policy attains the max-min slack; rho depends on the one returned.
  EXPECT_GE(report.rho, 0.0);
}

TEST(SlaterGap, BoundaryThresholdHasNoSlaterPoint) {
  const auto m = fixtures::tiny_model();
  const double top = optimal_value(m.transition, 0, m.cost_mean[0]).value;
  EXPECT_THROW(slater_gap(m, {top}), NoSlaterPointError);
}

TEST(SlaterGap, NoConstraintsHasNoSlaterPoint) {
  RngStream rng(46, 0);
  EXPECT_THROW(slater_gap(fixtures::random_model(2, 2, 2, 0, rng), {}), NoSlaterPointError);
}

TEST(SlaterGap, RhoFollowsItsDefinition) {
  const auto m = fixtures::tiny_model();
  const double alpha = 0.9;
  const auto r = slater_gap(m, {alpha});
  const auto opt = solve_optimal_occupancy(m, {alpha});
  EXPECT_NEAR(r.optimal_reward, opt.objective, 1e-12);
  EXPECT_NEAR(exact_value(m, r.slater_policy, m.cost_mean[0]) - alpha, r.slack[0], 1e-8);
  EXPECT_NEAR(exact_value(m, r.slater_policy, m.reward_mean), r.slater_reward, 1e-8);
  const double expected = (opt.objective - r.slater_reward) / r.slack[0];
  EXPECT_NEAR(r.rho, expected > 1e-9 ? expected : 0.0, 1e-9);
}

TEST(Enumeration, CountsPolicies) {
  RngStream rng(47, 0);
  const auto m = fixtures::random_model(1, 2, 2, 0, rng);
  EXPECT_EQ(enumerate_deterministic_policies(m).size(), 4u);
  EXPECT_EQ(deterministic_policy_count(fixtures::random_model(3, 2, 2, 0, rng)), 64u);
}

TEST(Enumeration, PoliciesAreDistinctAndDeterministic) {
  const auto pols = enumerate_deterministic_policies(fixtures::tiny_model());
  for (std::size_t i = 0; i < pols.size(); ++i) {
    for (double p : pols[i].policy.probs.values()) EXPECT_TRUE(p == 0.0 || p == 1.0);
    for (std::size_t j = i + 1; j < pols.size(); ++j)
      EXPECT_FALSE(pols[i].policy.probs == pols[j].policy.probs);
  }
}

TEST(Enumeration, GuardRefusesWithCount) {
  RngStream rng(48, 0);
  const auto m = fixtures::random_model(5, 4, 5, 0, rng);
  try {
    enumerate_deterministic_policies(m);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("1125899906842624"), std::string::npos) << e.what();
  }
}

TEST(Enumeration, ChainMaximumMatchesClosedForm) {
  const auto m0 = make_chain_cmdp(3, 5, 0);
  double best = 0.0;
  for (const auto& p : enumerate_deterministic_policies(m0)) best = std::max(best, p.values.reward);
  EXPECT_NEAR(best, chain_optimal_reward(3, 5, 0), 1e-12);
}

TEST(Enumeration, LpDominatesFeasibleDeterministicPolicies) {
  const auto m = make_chain_cmdp(3, 4, 1);
  const auto alpha = m.episodic_thresholds();
  const auto lp = solve_optimal_occupancy(m, alpha);
  ASSERT_TRUE(lp.optimal());
  for (const auto& p : enumerate_deterministic_policies(m))
    if (p.values.cost[0] >= alpha[0]) EXPECT_LE(p.values.reward, lp.objective + 1e-9);
}
