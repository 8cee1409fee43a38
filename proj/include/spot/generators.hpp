#pragma once

// Reproducible CMDP instances: a known-answer chain and a random generator
// with a guaranteed Slater point.

#include <algorithm>
#include <string>
#include <vector>

#include "spot/cmdp.hpp"
#include "spot/oracle.hpp"
#include "spot/rng.hpp"

namespace spot {

/// Right-moving chain on states 0..length-1 with two actions.
///
///   action 0 (advance): s -> min(s+1, length-1)
///   action 1 (wait):    s -> s
///
/// Every step spent in the terminal state pays reward 1; every step spent
/// elsewhere pays 1 on each constraint signal. Hence V_r + V_gi = H for all
/// policies, the fastest path earns V_r = H - length + 1, and each per-step
/// threshold is (length - 1/2) / H so that alpha_i = length - 1/2 exceeds the
/// fastest path's constraint value length - 1 by one half. The constrained
/// optimum is therefore V_r* = H - length + 1/2 (see chain_optimal_reward).
///
/// Requires length >= 2 and H >= length.
inline CmdpModel make_chain_cmdp(int length, int horizon, int num_constraints) {
  if (length < 2) throw DomainError("make_chain_cmdp: length must be >= 2");
  if (horizon < length) throw DomainError("make_chain_cmdp: horizon must be >= length");
  if (num_constraints < 0) throw DomainError("make_chain_cmdp: negative constraint count");

  const int S = length, A = 2, H = horizon, m = num_constraints;
  const int terminal = S - 1;
  CmdpModel model;
  model.num_states = S;
  model.num_actions = A;
  model.horizon = H;
  model.num_constraints = m;
  model.initial_state = 0;
  model.transition = TransitionTable(H, S, A);
  model.reward_mean = StepTable(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      model.transition(h, s, 0, std::min(s + 1, terminal)) = 1.0;
      model.transition(h, s, 1, s) = 1.0;
      for (int a = 0; a < A; ++a) model.reward_mean(h, s, a) = s == terminal ? 1.0 : 0.0;
    }
  model.cost_mean.assign(static_cast<std::size_t>(m), StepTable(H, S, A));
  for (auto& g : model.cost_mean)
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) g(h, s, a) = s == terminal ? 0.0 : 1.0;
  model.threshold_mean.assign(
      static_cast<std::size_t>(m),
      std::vector<double>(static_cast<std::size_t>(H), (length - 0.5) / horizon));
  return model;
}

/// Closed-form optimal reward of make_chain_cmdp(length, horizon, m).
inline double chain_optimal_reward(int length, int horizon, int num_constraints) {
  return num_constraints == 0 ? horizon - length + 1.0 : horizon - length + 0.5;
}

inline constexpr int kGeneratorRetries = 100;

/// Random dense instance. Transition rows are flat-Dirichlet, reward and cost
/// means are uniform on [0,1], and each per-step threshold is
/// (V_gi(uniform policy) - min_slack) / H clipped to [0,1], so the uniform
/// policy has slack >= min_slack before clipping. Instances whose max-min
/// slack (by LP) falls short of min_slack - 1e-6 are redrawn.
inline CmdpModel make_random_cmdp(int states, int actions, int horizon, int num_constraints,
                                  double min_slack, RngStream& rng) {
  if (states < 1 || actions < 1 || horizon < 1 || num_constraints < 0)
    throw DomainError("make_random_cmdp: dimensions must be positive");
  const int S = states, A = actions, H = horizon, m = num_constraints;

  for (int attempt = 0; attempt < kGeneratorRetries; ++attempt) {
    CmdpModel model;
    model.num_states = S;
    model.num_actions = A;
    model.horizon = H;
    model.num_constraints = m;
    model.initial_state = 0;
    model.transition = TransitionTable(H, S, A);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          auto row = model.transition.row(h, s, a);
          double total = 0.0;
          for (auto& p : row) total += (p = rng.exponential());
          double acc = 0.0;
          for (int n = 0; n + 1 < S; ++n) acc += (row[n] /= total);
          row[S - 1] = std::max(0.0, 1.0 - acc);
        }
    model.reward_mean = StepTable(H, S, A);
    for (auto& r : model.reward_mean.values()) r = rng.uniform();
    model.cost_mean.assign(static_cast<std::size_t>(m), StepTable(H, S, A));
    for (auto& g : model.cost_mean)
      for (auto& v : g.values()) v = rng.uniform();

    const Policy uniform = Policy::uniform(H, S, A);
    model.threshold_mean.assign(static_cast<std::size_t>(m), std::vector<double>());
    for (int i = 0; i < m; ++i) {
      const double v = exact_value(model, uniform, model.cost_mean[i]);
      const double per_step = std::clamp((v - min_slack) / H, 0.0, 1.0);
      model.threshold_mean[i].assign(static_cast<std::size_t>(H), per_step);
    }

    if (m == 0) return model;
    try {
      const auto report = slater_gap(model, model.episodic_thresholds());
      if (report.max_min_slack >= min_slack - 1e-6) return model;
    } catch (const NoSlaterPointError&) {
    }
  }
  throw GenerationError("make_random_cmdp: no instance with slack " + detail::fmt_num(min_slack) +
                        " after " + std::to_string(kGeneratorRetries) + " attempts");
}

}  // namespace spot
