#pragma once

// Online estimators fed by episode traces: visit counts, empirical means,
// exploration bonuses, the growing-window threshold estimator and the
// pessimistic / optimistic / blended episodic thresholds built from it.
//
// Episode indices are 1-based. After `t-1` completed episodes the state holds
// everything needed to act in episode t; all estimates use data from
// episodes <= t-1 only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "spot/cmdp.hpp"
#include "spot/env.hpp"

namespace spot {

struct EstimatorConfig {
  double gamma = 0.5;            // window fraction, (0,1]
  double delta = 0.05;           // confidence, (0,1)
  long planning_horizon = 1000;  // T inside the log factors
  /// Zeroes every bonus and radius. Only meant for ablations.
  bool disable_confidence = false;
};

/// Confidence radius of the windowed threshold estimate.
inline double threshold_radius(long window_count, int S, int A, int H, int m, long T,
                               double delta) {
  const double log_term = std::log(std::max(m, 1) * double(S) * A * H * double(T) / delta);
  return std::min(1.0, std::sqrt(4.0 * log_term / std::max(1.0, double(window_count))));
}

/// Hoeffding bonus for a mean in [0,1].
inline double reward_bonus(long count, int S, int A, int H, int m, long T, double delta) {
  const double log_term = std::log(2.0 * S * A * H * std::max(m, 1) * double(T) / delta);
  return std::min(1.0, std::sqrt(log_term / (2.0 * std::max(1.0, double(count)))));
}

/// L1 transition deviation bound scaled by the value range H.
inline double transition_bonus(long count, int S, int A, int H, long T, double delta) {
  const double log_term = S * std::log(2.0) + std::log(double(S) * A * H * double(T) / delta);
  return std::min(double(H), H * std::sqrt(2.0 * log_term / std::max(1.0, double(count))));
}

class EstimatorState {
 public:
  EstimatorState(int states, int actions, int horizon, int num_constraints, EstimatorConfig config)
      : S_(states),
        A_(actions),
        H_(horizon),
        m_(num_constraints),
        config_(config),
        counts_(static_cast<std::size_t>(horizon) * states * actions, 0),
        transition_counts_(static_cast<std::size_t>(horizon) * states * actions * states, 0),
        reward_sums_(counts_.size(), 0.0),
        cost_sums_(counts_.size() * num_constraints, 0.0),
        window_counts_(counts_.size(), 0),
        window_sums_(counts_.size() * num_constraints, 0.0) {
    if (!(config.gamma > 0.0 && config.gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
    if (!(config.delta > 0.0 && config.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (config.planning_horizon < 1) throw ConfigError("planning horizon must be >= 1");
  }

  int states() const { return S_; }
  int actions() const { return A_; }
  int horizon() const { return H_; }
  int num_constraints() const { return m_; }
  const EstimatorConfig& config() const { return config_; }

  long completed_episodes() const { return completed_; }
  /// Episode about to be played, t.
  long current_episode() const { return completed_ + 1; }

  /// W_t = max{1, floor(gamma t)}.
  long window_length(long t) const {
    return std::max(1L, static_cast<long>(std::floor(config_.gamma * double(t) + 1e-9)));
  }
  /// First episode of the window for the current episode; the window holds
  /// episodes [window_begin(), current_episode() - 1] and may be empty.
  long window_begin() const { return window_begin_; }

  long count(int h, int s, int a) const { return counts_[idx(h, s, a)]; }
  long transition_count(int h, int s, int a, int next) const {
    return transition_counts_[idx(h, s, a) * S_ + next];
  }
  double reward_sum(int h, int s, int a) const { return reward_sums_[idx(h, s, a)]; }
  double cost_sum(int i, int h, int s, int a) const { return cost_sums_[idx(h, s, a) * m_ + i]; }
  long window_count(int h, int s, int a) const { return window_counts_[idx(h, s, a)]; }
  double window_threshold_sum(int i, int h, int s, int a) const {
    return window_sums_[idx(h, s, a) * m_ + i];
  }

  /// (s,a) visited at step h of episode t, as s*A + a.
  int buffered_pair(long t, int h) const {
    return buffer_pairs_[static_cast<std::size_t>(t - 1) * H_ + h];
  }
  double buffered_threshold(long t, int h, int i) const {
    return buffer_samples_[(static_cast<std::size_t>(t - 1) * H_ + h) * m_ + i];
  }

  /// Advance every count, sum and the threshold window by one episode.
  void update(const EpisodeTrace& trace) {
    if (static_cast<int>(trace.steps.size()) != H_)
      throw StructuralError("update_counts: trace length differs from the horizon");
    ++completed_;
    for (int h = 0; h < H_; ++h) {
      const auto& st = trace.steps[h];
      if (st.state < 0 || st.state >= S_ || st.action < 0 || st.action >= A_ || st.next_state < 0 ||
          st.next_state >= S_ || static_cast<int>(st.costs.size()) != m_ ||
          static_cast<int>(st.thresholds.size()) != m_)
        throw StructuralError("update_counts: malformed trace step");
      const std::size_t k = idx(h, st.state, st.action);
      ++counts_[k];
      ++transition_counts_[k * S_ + st.next_state];
      reward_sums_[k] += st.reward;
      for (int i = 0; i < m_; ++i) cost_sums_[k * m_ + i] += st.costs[i];

      buffer_pairs_.push_back(st.state * A_ + st.action);
      for (int i = 0; i < m_; ++i) buffer_samples_.push_back(st.thresholds[i]);
      add_to_window(completed_, h, +1);
    }
    const long t = current_episode();
    const long begin = std::max(1L, t - window_length(t) + 1);
    while (window_begin_ < begin) {
      if (window_begin_ <= completed_)
        for (int h = 0; h < H_; ++h) add_to_window(window_begin_, h, -1);
      ++window_begin_;
    }
  }

 private:
  std::size_t idx(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * S_ + s) * A_ + a;
  }

  void add_to_window(long t, int h, int sign) {
    const int pair = buffered_pair(t, h);
    const std::size_t k = static_cast<std::size_t>(h) * S_ * A_ + pair;
    window_counts_[k] += sign;
    for (int i = 0; i < m_; ++i) window_sums_[k * m_ + i] += sign * buffered_threshold(t, h, i);
  }

  int S_, A_, H_, m_;
  EstimatorConfig config_;
  long completed_ = 0;
  long window_begin_ = 1;
  std::vector<long> counts_;
  std::vector<long> transition_counts_;
  std::vector<double> reward_sums_;
  std::vector<double> cost_sums_;
  std::vector<int> buffer_pairs_;
  std::vector<double> buffer_samples_;
  std::vector<long> window_counts_;
  std::vector<double> window_sums_;
};

inline void update_counts(EstimatorState& state, const EpisodeTrace& trace) { state.update(trace); }

struct EmpiricalModel {
  StepTable reward;
  std::vector<StepTable> cost;
  TransitionTable transition;
  StepTable visited;  // 1 where N > 0, else 0 (row of `transition` is all zero)
};

/// Sums divided by max{1, N}.
inline EmpiricalModel empirical_means(const EstimatorState& st) {
  const int H = st.horizon(), S = st.states(), A = st.actions(), m = st.num_constraints();
  EmpiricalModel out{StepTable(H, S, A),
                     std::vector<StepTable>(static_cast<std::size_t>(m), StepTable(H, S, A)),
                     TransitionTable(H, S, A), StepTable(H, S, A)};
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const long n = st.count(h, s, a);
        const double denom = std::max(1.0, double(n));
        out.reward(h, s, a) = st.reward_sum(h, s, a) / denom;
        for (int i = 0; i < m; ++i) out.cost[i](h, s, a) = st.cost_sum(i, h, s, a) / denom;
        for (int nx = 0; nx < S; ++nx)
          out.transition(h, s, a, nx) = double(st.transition_count(h, s, a, nx)) / denom;
        out.visited(h, s, a) = n > 0 ? 1.0 : 0.0;
      }
  return out;
}

inline double bonus_r(const EstimatorState& st, int h, int s, int a) {
  if (st.config().disable_confidence) return 0.0;
  return reward_bonus(st.count(h, s, a), st.states(), st.actions(), st.horizon(),
                      st.num_constraints(), st.config().planning_horizon, st.config().delta);
}

inline double bonus_p(const EstimatorState& st, int h, int s, int a) {
  if (st.config().disable_confidence) return 0.0;
  return transition_bonus(st.count(h, s, a), st.states(), st.actions(), st.horizon(),
                          st.config().planning_horizon, st.config().delta);
}

struct GwEstimate {
  double estimate = 0.0;
  double radius = 1.0;
};

inline double window_radius(const EstimatorState& st, int h, int s, int a) {
  if (st.config().disable_confidence) return 0.0;
  return threshold_radius(st.window_count(h, s, a), st.states(), st.actions(), st.horizon(),
                          st.num_constraints(), st.config().planning_horizon, st.config().delta);
}

/// Windowed threshold estimate for constraint i at (h,s,a) and its radius.
inline GwEstimate gw_threshold(const EstimatorState& st, int i, int h, int s, int a) {
  const long n = st.window_count(h, s, a);
  GwEstimate out;
  out.estimate = n > 0 ? st.window_threshold_sum(i, h, s, a) / double(n) : 0.0;
  out.radius = window_radius(st, h, s, a);
  return out;
}

struct StateAction {
  int state = 0;
  int action = 0;

  bool operator==(const StateAction&) const = default;
};

/// Most visited pair of the window at step h; ties go to the smallest (s,a).
inline StateAction representative_pair(const EstimatorState& st, int h) {
  StateAction best;
  long best_count = -1;
  for (int s = 0; s < st.states(); ++s)
    for (int a = 0; a < st.actions(); ++a)
      if (st.window_count(h, s, a) > best_count) {
        best_count = st.window_count(h, s, a);
        best = {s, a};
      }
  return best;
}

enum class ThresholdMode { pessimistic, optimistic, blended };

struct ThresholdRule {
  ThresholdMode mode = ThresholdMode::pessimistic;
  double xi = 0.0;  // weight of the optimistic end, blended mode only

  static ThresholdRule pessimistic() { return {ThresholdMode::pessimistic, 0.0}; }
  static ThresholdRule optimistic() { return {ThresholdMode::optimistic, 1.0}; }
  static ThresholdRule blended(double xi) { return {ThresholdMode::blended, xi}; }
};

struct ThresholdEstimate {
  std::vector<StateAction> representative;  // [h]
  std::vector<std::vector<double>> point;   // [i][h]
  std::vector<std::vector<double>> radius;  // [i][h], unclipped
  std::vector<std::vector<double>> upper;   // [i][h], min{1, point + radius}
  std::vector<std::vector<double>> lower;   // [i][h], max{0, point - radius}
  std::vector<double> point_sum;            // [i]
  std::vector<double> pessimistic;          // [i], sum of upper
  std::vector<double> optimistic;           // [i], sum of lower

  /// xi * optimistic + (1 - xi) * pessimistic
  std::vector<double> blended(double xi) const {
    std::vector<double> out(pessimistic.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = xi * optimistic[i] + (1.0 - xi) * pessimistic[i];
    return out;
  }

  std::vector<double> select(const ThresholdRule& rule) const {
    switch (rule.mode) {
      case ThresholdMode::pessimistic:
        return pessimistic;
      case ThresholdMode::optimistic:
        return optimistic;
      case ThresholdMode::blended:
        return blended(rule.xi);
    }
    return pessimistic;
  }
};

/// Per-step estimates read at the representative pair, summed over steps.
inline ThresholdEstimate threshold_estimate(const EstimatorState& st) {
  const int H = st.horizon(), m = st.num_constraints();
  ThresholdEstimate out;
  out.representative.resize(static_cast<std::size_t>(H));
  const std::vector<double> zeros(static_cast<std::size_t>(H), 0.0);
  out.point.assign(static_cast<std::size_t>(m), zeros);
  out.radius = out.upper = out.lower = out.point;
  out.point_sum.assign(static_cast<std::size_t>(m), 0.0);
  out.pessimistic = out.optimistic = out.point_sum;
  for (int h = 0; h < H; ++h) {
    const StateAction rep = representative_pair(st, h);
    out.representative[h] = rep;
    for (int i = 0; i < m; ++i) {
      const GwEstimate e = gw_threshold(st, i, h, rep.state, rep.action);
      out.point[i][h] = e.estimate;
      out.radius[i][h] = e.radius;
      out.upper[i][h] = std::min(1.0, e.estimate + e.radius);
      out.lower[i][h] = std::max(0.0, e.estimate - e.radius);
      out.point_sum[i] += e.estimate;
      out.pessimistic[i] += out.upper[i][h];
      out.optimistic[i] += out.lower[i][h];
    }
  }
  return out;
}

inline std::vector<double> episodic_thresholds(const EstimatorState& st,
                                               const ThresholdRule& rule) {
  if (rule.mode == ThresholdMode::blended && !(rule.xi >= 0.0 && rule.xi <= 1.0))
    throw DomainError("blended threshold weight xi must lie in [0,1]");
  return threshold_estimate(st).select(rule);
}

struct OptimisticModel {
  StepTable reward;             // r_hat + phi
  std::vector<StepTable> cost;  // g_hat_i + phi
  TransitionTable transition;   // p_hat, uniform rows where unvisited
};

inline OptimisticModel optimistic_model(const EstimatorState& st) {
  EmpiricalModel emp = empirical_means(st);
  const int H = st.horizon(), S = st.states(), A = st.actions(), m = st.num_constraints();
  OptimisticModel out{std::move(emp.reward), std::move(emp.cost), std::move(emp.transition)};
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double phi = bonus_r(st, h, s, a) + bonus_p(st, h, s, a);
        out.reward(h, s, a) += phi;
        for (int i = 0; i < m; ++i) out.cost[i](h, s, a) += phi;
        if (emp.visited(h, s, a) == 0.0)
          for (auto& p : out.transition.row(h, s, a)) p = 1.0 / S;
      }
  return out;
}

/// Counts of estimates outside their confidence bands against a known model.
struct BandBreaches {
  long threshold = 0;   // |alpha_hat - alpha_{i,h}| > zeta over (i,h,s,a)
  long reward = 0;      // |r_hat - r| > bonus_r over (h,s,a)
  long cost = 0;        // |g_hat_i - g_i| > bonus_r over (i,h,s,a)
  long transition = 0;  // ||p_hat - p||_1 > bonus_p / H over visited (h,s,a)

  long total() const { return threshold + reward + cost + transition; }
};

inline BandBreaches band_breaches(const EstimatorState& st, const CmdpModel& model) {
  const int H = st.horizon(), S = st.states(), A = st.actions(), m = st.num_constraints();
  BandBreaches out;
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        for (int i = 0; i < m; ++i) {
          const GwEstimate e = gw_threshold(st, i, h, s, a);
          if (std::abs(e.estimate - model.threshold_mean[i][h]) > e.radius) ++out.threshold;
        }
        const long n = st.count(h, s, a);
        const double denom = std::max(1.0, double(n));
        const double br = bonus_r(st, h, s, a);
        if (std::abs(st.reward_sum(h, s, a) / denom - model.reward_mean(h, s, a)) > br)
          ++out.reward;
        for (int i = 0; i < m; ++i)
          if (std::abs(st.cost_sum(i, h, s, a) / denom - model.cost_mean[i](h, s, a)) > br)
            ++out.cost;
        if (n > 0) {
          double l1 = 0.0;
          for (int nx = 0; nx < S; ++nx)
            l1 += std::abs(double(st.transition_count(h, s, a, nx)) / denom -
                           model.transition(h, s, a, nx));
          if (l1 > bonus_p(st, h, s, a) / H) ++out.transition;
        }
      }
  return out;
}

/// Delimited snapshot, one row per (h,s,a):
/// h,s,a,N,N_window,r_hat,bonus_r,bonus_p,g_hat_1..m,alpha_hat_1..m,zeta
inline void write_snapshot(std::ostream& os, const EstimatorState& st) {
  const int m = st.num_constraints();
  os << "h,s,a,N,N_window,r_hat,bonus_r,bonus_p";
  for (int i = 0; i < m; ++i) os << ",g_hat_" << i + 1;
  for (int i = 0; i < m; ++i) os << ",alpha_hat_" << i + 1;
  os << ",zeta\n";
  for (int h = 0; h < st.horizon(); ++h)
    for (int s = 0; s < st.states(); ++s)
      for (int a = 0; a < st.actions(); ++a) {
        const double denom = std::max(1.0, double(st.count(h, s, a)));
        os << h << ',' << s << ',' << a << ',' << st.count(h, s, a) << ','
           << st.window_count(h, s, a) << ',' << st.reward_sum(h, s, a) / denom << ','
           << bonus_r(st, h, s, a) << ',' << bonus_p(st, h, s, a);
        for (int i = 0; i < m; ++i) os << ',' << st.cost_sum(i, h, s, a) / denom;
        for (int i = 0; i < m; ++i) os << ',' << gw_threshold(st, i, h, s, a).estimate;
        os << ',' << window_radius(st, h, s, a) << '\n';
      }
}

}  // namespace spot
