#pragma once

// The SPOT episode loop: optimistic model refresh, threshold selection,
// truncated policy evaluation, exponentiated-gradient policy step, projected
// dual step, rollout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spot/cmdp.hpp"
#include "spot/env.hpp"
#include "spot/estimation.hpp"
#include "spot/rng.hpp"
#include "spot/tpe.hpp"

namespace spot {

/// Lagrange multipliers confined to the box [0, rho]^m.
struct DualState {
  std::vector<double> lambda;
  double rho = 1.0;
  double step_scale = 1.0;  // eta_lambda; the step is (alpha - V) / eta_lambda
};

struct SpotConfig {
  long episodes = 1000;
  double gamma = 0.5;
  double delta = 0.05;
  ThresholdRule rule = ThresholdRule::pessimistic();
  std::optional<double> policy_step;  // eta_t; derived from the horizon when unset
  std::optional<double> dual_scale;   // eta_lambda; derived when unset
  double rho = 1.0;
  std::uint64_t seed = 0;
  bool disable_confidence = false;
  bool track_breaches = true;
  /// Slater slack xi of the true model, when known; enables the log of
  /// episodes where the pessimistic tightening exceeds it.
  std::vector<double> slater_slack;
};

/// sqrt(2 ln A / (H^2 (1 + m rho)^2 T))
inline double default_policy_step(int actions, int horizon, int num_constraints, double rho,
                                  long episodes) {
  if (actions < 2) return 1.0;
  const double scale = horizon * (1.0 + num_constraints * rho);
  return std::sqrt(2.0 * std::log(double(actions)) / (scale * scale * double(episodes)));
}

/// sqrt(m H^2 T / rho^2)
inline double default_dual_scale(int horizon, int num_constraints, double rho, long episodes) {
  return std::sqrt(std::max(num_constraints, 1) * double(horizon) * horizon * double(episodes)) /
         rho;
}

inline void validate_config(const SpotConfig& c) {
  if (c.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (c.rule.mode == ThresholdMode::blended && !(c.rule.xi >= 0.0 && c.rule.xi <= 1.0))
    throw ConfigError("xi must lie in [0,1]");
  if (c.policy_step && !(*c.policy_step > 0.0)) throw ConfigError("eta_policy must be > 0");
  if (c.dual_scale && !(*c.dual_scale > 0.0)) throw ConfigError("eta_dual must be > 0");
  if (!(c.rho > 0.0) || !std::isfinite(c.rho)) throw ConfigError("rho must be > 0");
}

/// pi'(a|s) proportional to pi(a|s) exp(step * Q(s,a)), per (h,s).
inline Policy mirror_ascent_update(const Policy& policy, const StepTable& q, double step) {
  if (!(step > 0.0)) throw DomainError("mirror_ascent_update: step must be > 0");
  if (!q.same_shape(policy.probs)) throw StructuralError("mirror_ascent_update: shape mismatch");
  Policy out = policy;
  for (int h = 0; h < policy.horizon(); ++h)
    for (int s = 0; s < policy.states(); ++s) {
      auto qrow = q.row(h, s);
      double top = -std::numeric_limits<double>::infinity();
      for (double v : qrow) {
        if (!std::isfinite(v))
          throw DomainError("mirror_ascent_update: non-finite Q at h=" + std::to_string(h) +
                            " s=" + std::to_string(s));
        top = std::max(top, v);
      }
      auto row = out.probs.row(h, s);
      double total = 0.0;
      for (std::size_t a = 0; a < row.size(); ++a) {
        row[a] *= std::exp(step * (qrow[a] - top));
        total += row[a];
      }
      for (auto& p : row) p /= total;
    }
  return out;
}

/// lambda' = clamp(lambda + (alpha - V) / eta_lambda, 0, rho)
inline DualState dual_update(const DualState& dual, const std::vector<double>& threshold,
                             const std::vector<double>& value_estimate) {
  if (!(dual.rho > 0.0)) throw ConfigError("dual_update: rho must be > 0");
  if (threshold.size() != dual.lambda.size() || value_estimate.size() != dual.lambda.size())
    throw StructuralError("dual_update: vector lengths differ");
  DualState out = dual;
  for (std::size_t i = 0; i < out.lambda.size(); ++i)
    out.lambda[i] = std::clamp(
        dual.lambda[i] + (threshold[i] - value_estimate[i]) / dual.step_scale, 0.0, dual.rho);
  return out;
}

struct EpisodeRecord {
  long t = 0;
  double v_reward = 0.0;                // exact, true model, pi_t
  std::vector<double> v_cost;           // exact, true model, pi_t
  std::vector<double> threshold;        // alpha_diamond^t
  std::vector<double> lambda;           // lambda_t, as used by TPE at t
  std::vector<double> v_cost_estimate;  // truncated V of g_bar at s1
  BandBreaches breaches;                // estimates used at t vs the true model
  bool slack_exceeded = false;          // pessimistic tightening >= slater slack
};

struct RunLog {
  std::vector<EpisodeRecord> episodes;
  Policy final_policy;
  std::vector<double> final_lambda;
  double policy_step = 0.0;
  double dual_scale = 0.0;
  double rho = 0.0;

  /// Episodes whose threshold estimates left their band somewhere.
  long threshold_breach_episodes() const {
    return static_cast<long>(std::count_if(episodes.begin(), episodes.end(),
                                           [](const auto& e) { return e.breaches.threshold > 0; }));
  }
};

/// Per-episode view handed to an observer after the rollout of episode t.
struct EpisodeContext {
  long t;
  const Policy& executed_policy;
  const std::vector<double>& lambda_used;
  const TruncatedTables& tables;
  const EpisodeTrace& trace;
  const EstimatorState& estimator;  // before this episode's update
};

using EpisodeObserver = std::function<void(const EpisodeContext&)>;

inline RunLog run_spot(const CmdpModel& model, const SpotConfig& config,
                       const EpisodeObserver& observer = {}) {
  {
    auto report = validate_model(model);
    if (!report.ok()) throw StructuralError("run_spot: invalid model: " + report.breaches.front());
  }
  validate_config(config);
  const int S = model.num_states, A = model.num_actions, H = model.horizon,
            m = model.num_constraints;
  const double eta =
      config.policy_step.value_or(default_policy_step(A, H, m, config.rho, config.episodes));
  const double eta_lambda =
      config.dual_scale.value_or(default_dual_scale(H, m, config.rho, config.episodes));
  const std::vector<double> true_alpha = model.episodic_thresholds();

  EstimatorState estimator(
      S, A, H, m, {config.gamma, config.delta, config.episodes, config.disable_confidence});
  Policy policy = Policy::uniform(H, S, A);
  DualState dual{std::vector<double>(static_cast<std::size_t>(m), 0.0), config.rho, eta_lambda};
  RngStream rng(config.seed, 0);

  RunLog log;
  log.policy_step = eta;
  log.dual_scale = eta_lambda;
  log.rho = config.rho;
  log.episodes.reserve(static_cast<std::size_t>(config.episodes));

  for (long t = 1; t <= config.episodes; ++t) {
    const OptimisticModel opt = optimistic_model(estimator);
    const ThresholdEstimate est = threshold_estimate(estimator);
    const std::vector<double> alpha = est.select(config.rule);
    const TruncatedTables tables = truncated_policy_eval(opt.reward, opt.cost, opt.transition,
                                                         policy, dual.lambda, model.initial_state);
    for (double v : tables.q_composite.values())
      if (!std::isfinite(v))
        throw DomainError("run_spot: non-finite Q table at episode " + std::to_string(t));

    EpisodeRecord rec;
    rec.t = t;
    const ValueVector exact = exact_values(model, policy);
    rec.v_reward = exact.reward;
    rec.v_cost = exact.cost;
    rec.threshold = alpha;
    rec.lambda = dual.lambda;
    rec.v_cost_estimate = tables.v_cost_at_start;
    if (config.track_breaches) rec.breaches = band_breaches(estimator, model);
    if (config.slater_slack.size() == static_cast<std::size_t>(m))
      for (int i = 0; i < m; ++i)
        if (est.pessimistic[i] - true_alpha[i] >= config.slater_slack[i]) rec.slack_exceeded = true;

    Policy next_policy = mirror_ascent_update(policy, tables.q_composite, eta);
    DualState next_dual = dual_update(dual, alpha, tables.v_cost_at_start);

    const EpisodeTrace trace = run_episode(model, policy, t, rng);
    if (observer) observer(EpisodeContext{t, policy, dual.lambda, tables, trace, estimator});
    estimator.update(trace);

    log.episodes.push_back(std::move(rec));
    policy = std::move(next_policy);
    dual = std::move(next_dual);
  }
  log.final_policy = std::move(policy);
  log.final_lambda = dual.lambda;
  return log;
}

}  // namespace spot
