#pragma once

// Episode rollouts with bounded noisy reward, cost and threshold signals.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "spot/cmdp.hpp"
#include "spot/rng.hpp"

namespace spot {

struct TraceStep {
  int state = 0;
  int action = 0;
  int next_state = 0;
  double reward = 0.0;
  std::vector<double> costs;       // [i]
  std::vector<double> thresholds;  // [i]
};

struct EpisodeTrace {
  long episode = 0;  // 1-based episode index t
  std::vector<TraceStep> steps;
};

/// Draw one signal in [0,1] whose mean is `mean` (exactly for Bernoulli).
inline double sample_signal(const NoiseFamily& family, double mean, RngStream& rng) {
  if (!(mean >= 0.0 && mean <= 1.0))
    throw DomainError("sample_signal: mean " + detail::fmt_num(mean) + " outside [0,1]");
  switch (family.kind) {
    case NoiseKind::bernoulli:
      return rng.bernoulli(mean) ? 1.0 : 0.0;
    case NoiseKind::clipped_gaussian:
      return std::clamp(mean + family.sigma * rng.normal(), 0.0, 1.0);
  }
  return mean;
}

/// One episode of `policy` on `model`. Per step the draw order is: action,
/// reward, costs (i ascending), thresholds (i ascending), next state.
inline EpisodeTrace run_episode(const CmdpModel& model, const Policy& policy, long t,
                                RngStream& rng) {
  detail::require_policy_shape(policy, model.horizon, model.num_states, model.num_actions);
  const int m = model.num_constraints;
  EpisodeTrace trace;
  trace.episode = t;
  trace.steps.resize(static_cast<std::size_t>(model.horizon));

  int s = model.initial_state;
  for (int h = 0; h < model.horizon; ++h) {
    TraceStep& step = trace.steps[h];
    step.state = s;
    step.action = rng.categorical(policy.probs.row(h, s));
    const int a = step.action;
    step.reward = sample_signal(model.noise, model.reward_mean(h, s, a), rng);
    step.costs.resize(static_cast<std::size_t>(m));
    step.thresholds.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      step.costs[i] = sample_signal(model.noise, model.cost_mean[i](h, s, a), rng);
    for (int i = 0; i < m; ++i)
      step.thresholds[i] = sample_signal(model.noise, model.threshold_mean[i][h], rng);
    step.next_state = rng.categorical(model.transition.row(h, s, a));
    s = step.next_state;
  }
  return trace;
}

/// Delimited dump: t,h,s,a,s_next,r,g_1..g_m,alpha_1..alpha_m
inline void write_trace(std::ostream& os, const EpisodeTrace& trace) {
  for (std::size_t h = 0; h < trace.steps.size(); ++h) {
    const auto& st = trace.steps[h];
    os << trace.episode << ',' << h << ',' << st.state << ',' << st.action << ',' << st.next_state
       << ',' << st.reward;
    for (double g : st.costs) os << ',' << g;
    for (double a : st.thresholds) os << ',' << a;
    os << '\n';
  }
}

}  // namespace spot
