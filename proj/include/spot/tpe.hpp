#pragma once

// Truncated policy evaluation: backward induction on bonused payoffs where
// each Q value is capped by the remaining horizon H - h (0-based h).

#include <algorithm>
#include <cmath>
#include <vector>

#include "spot/cmdp.hpp"

namespace spot {

struct TruncatedTables {
  StepTable q_reward;
  std::vector<StepTable> q_cost;  // [i]
  StepTable q_composite;          // q_reward + sum_i lambda_i q_cost[i]
  double v_reward_at_start = 0.0;
  std::vector<double> v_cost_at_start;  // [i], the scalar fed to the dual update
};

namespace detail {

/// Truncated Q table for one payoff; returns V_0(initial_state).
inline double truncated_q(const StepTable& payoff, const TransitionTable& transition,
                          const Policy& policy, int initial_state, StepTable& q) {
  const int H = transition.horizon(), S = transition.states(), A = transition.actions();
  q = StepTable(H, S, A);
  std::vector<double> next(static_cast<std::size_t>(S), 0.0), cur(static_cast<std::size_t>(S));
  for (int h = H - 1; h >= 0; --h) {
    const double cap = H - h;
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        auto row = transition.row(h, s, a);
        double x = payoff(h, s, a);
        for (int n = 0; n < S; ++n) x += row[n] * next[n];
        x = std::min(x, cap);
        q(h, s, a) = x;
        v += policy(h, s, a) * x;
      }
      cur[s] = v;
    }
    std::swap(cur, next);
  }
  return next[static_cast<std::size_t>(initial_state)];
}

}  // namespace detail

inline TruncatedTables truncated_policy_eval(const StepTable& reward,
                                             const std::vector<StepTable>& costs,
                                             const TransitionTable& transition,
                                             const Policy& policy,
                                             const std::vector<double>& lambda, int initial_state) {
  const int H = transition.horizon(), S = transition.states(), A = transition.actions();
  detail::require_policy_shape(policy, H, S, A);
  if (reward.horizon() != H || reward.states() != S || reward.actions() != A)
    throw StructuralError("truncated_policy_eval: reward table shape mismatch");
  if (lambda.size() != costs.size())
    throw StructuralError("truncated_policy_eval: one multiplier per cost table expected");
  for (double l : lambda)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw DomainError("truncated_policy_eval: multipliers must be finite and non-negative");

  TruncatedTables out;
  out.v_reward_at_start =
      detail::truncated_q(reward, transition, policy, initial_state, out.q_reward);
  out.q_composite = out.q_reward;
  out.q_cost.resize(costs.size());
  out.v_cost_at_start.resize(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!costs[i].same_shape(reward))
      throw StructuralError("truncated_policy_eval: cost table shape mismatch");
    out.v_cost_at_start[i] =
        detail::truncated_q(costs[i], transition, policy, initial_state, out.q_cost[i]);
    auto& comp = out.q_composite.values();
    const auto& qc = out.q_cost[i].values();
    for (std::size_t k = 0; k < comp.size(); ++k) comp[k] += lambda[i] * qc[k];
  }
  return out;
}

}  // namespace spot
