#pragma once

// Ground-truth tabular CMDP: dense step-indexed tables, exact policy
// evaluation by backward induction and occupancy-measure conversions.
//
// Indices are 0-based throughout: steps h = 0..H-1, states s = 0..S-1,
// actions a = 0..A-1, constraints i = 0..m-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spot/errors.hpp"

namespace spot {

inline constexpr double kInputTolerance = 1e-12;
inline constexpr double kComputedTolerance = 1e-9;

/// Dense table l[h][s][a].
class StepTable {
 public:
  StepTable() = default;
  StepTable(int horizon, int states, int actions, double fill = 0.0)
      : horizon_(horizon),
        states_(states),
        actions_(actions),
        data_(static_cast<std::size_t>(horizon) * states * actions, fill) {
    if (horizon < 0 || states < 0 || actions < 0)
      throw StructuralError("StepTable: negative dimension");
  }

  int horizon() const { return horizon_; }
  int states() const { return states_; }
  int actions() const { return actions_; }

  double& operator()(int h, int s, int a) { return data_[index(h, s, a)]; }
  double operator()(int h, int s, int a) const { return data_[index(h, s, a)]; }

  std::span<double> row(int h, int s) {
    return {data_.data() + index(h, s, 0), static_cast<std::size_t>(actions_)};
  }
  std::span<const double> row(int h, int s) const {
    return {data_.data() + index(h, s, 0), static_cast<std::size_t>(actions_)};
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const StepTable& o) const {
    return horizon_ == o.horizon_ && states_ == o.states_ && actions_ == o.actions_;
  }

  bool operator==(const StepTable&) const = default;

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * states_ + s) * actions_ + a;
  }

  int horizon_ = 0;
  int states_ = 0;
  int actions_ = 0;
  std::vector<double> data_;
};

/// Dense transition kernel p[h][s][a][s'].
class TransitionTable {
 public:
  TransitionTable() = default;
  TransitionTable(int horizon, int states, int actions, double fill = 0.0)
      : horizon_(horizon),
        states_(states),
        actions_(actions),
        data_(static_cast<std::size_t>(horizon) * states * actions * states, fill) {
    if (horizon < 0 || states < 0 || actions < 0)
      throw StructuralError("TransitionTable: negative dimension");
  }

  int horizon() const { return horizon_; }
  int states() const { return states_; }
  int actions() const { return actions_; }

  double& operator()(int h, int s, int a, int next) { return data_[index(h, s, a) + next]; }
  double operator()(int h, int s, int a, int next) const { return data_[index(h, s, a) + next]; }

  std::span<double> row(int h, int s, int a) {
    return {data_.data() + index(h, s, a), static_cast<std::size_t>(states_)};
  }
  std::span<const double> row(int h, int s, int a) const {
    return {data_.data() + index(h, s, a), static_cast<std::size_t>(states_)};
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool operator==(const TransitionTable&) const = default;

 private:
  std::size_t index(int h, int s, int a) const {
    return ((static_cast<std::size_t>(h) * states_ + s) * actions_ + a) * states_;
  }

  int horizon_ = 0;
  int states_ = 0;
  int actions_ = 0;
  std::vector<double> data_;
};

enum class NoiseKind { bernoulli, clipped_gaussian };

/// Distribution family of the reward, cost and threshold signals. Clipped
/// Gaussian signals are biased towards the interior near 0 and 1.
struct NoiseFamily {
  NoiseKind kind = NoiseKind::bernoulli;
  double sigma = 0.0;

  bool operator==(const NoiseFamily&) const = default;
};

struct CmdpModel {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int num_constraints = 0;
  int initial_state = 0;
  TransitionTable transition;
  StepTable reward_mean;
  std::vector<StepTable> cost_mean;                 // [i] -> g_i[h][s][a]
  std::vector<std::vector<double>> threshold_mean;  // [i][h]
  NoiseFamily noise;

  /// alpha_i = sum_h alpha[i][h]
  double episodic_threshold(int i) const {
    const auto& row = threshold_mean.at(static_cast<std::size_t>(i));
    return std::accumulate(row.begin(), row.end(), 0.0);
  }

  std::vector<double> episodic_thresholds() const {
    std::vector<double> out(static_cast<std::size_t>(num_constraints));
    for (int i = 0; i < num_constraints; ++i) out[i] = episodic_threshold(i);
    return out;
  }

  bool operator==(const CmdpModel&) const = default;
};

/// pi[h][s][a]; rows are action distributions.
struct Policy {
  StepTable probs;

  static Policy uniform(int horizon, int states, int actions) {
    return Policy{StepTable(horizon, states, actions, 1.0 / actions)};
  }

  double operator()(int h, int s, int a) const { return probs(h, s, a); }
  int horizon() const { return probs.horizon(); }
  int states() const { return probs.states(); }
  int actions() const { return probs.actions(); }
};

/// q[h][s][a] = P(s_h = s, a_h = a).
struct OccupancyMeasure {
  StepTable mass;

  double operator()(int h, int s, int a) const { return mass(h, s, a); }
};

struct ValueVector {
  double reward = 0.0;
  std::vector<double> cost;
};

struct ValidationReport {
  std::vector<std::string> breaches;

  bool ok() const { return breaches.empty(); }
};

namespace detail {

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline void require(bool cond, const char* what) {
  if (!cond) throw StructuralError(what);
}

inline void require_policy_shape(const Policy& policy, int horizon, int states, int actions) {
  if (policy.horizon() != horizon || policy.states() != states || policy.actions() != actions)
    throw StructuralError("policy dimensions do not match the model");
}

inline bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace detail

inline ValidationReport validate_model(const CmdpModel& model) {
  ValidationReport report;
  auto breach = [&](std::string msg) { report.breaches.push_back(std::move(msg)); };

  const int H = model.horizon, S = model.num_states, A = model.num_actions,
            m = model.num_constraints;
  if (S <= 0) breach("num_states must be positive");
  if (A <= 0) breach("num_actions must be positive");
  if (H <= 0) breach("horizon must be positive");
  if (m < 0) breach("num_constraints must be non-negative");
  if (!report.ok()) return report;

  if (model.initial_state < 0 || model.initial_state >= S)
    breach("initial_state " + std::to_string(model.initial_state) + " out of range");

  if (model.transition.horizon() != H || model.transition.states() != S ||
      model.transition.actions() != A) {
    breach("transition table has wrong dimensions");
  } else {
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          auto row = model.transition.row(h, s, a);
          double sum = 0.0;
          for (int n = 0; n < S; ++n) {
            if (!(row[n] >= 0.0) || !std::isfinite(row[n]))
              breach("p[" + std::to_string(h) + "][" + std::to_string(s) + "][" +
                     std::to_string(a) + "][" + std::to_string(n) +
                     "]: negative or non-finite transition probability " + detail::fmt_num(row[n]));
            sum += row[n];
          }
          if (std::abs(sum - 1.0) > kInputTolerance)
            breach("p[" + std::to_string(h) + "][" + std::to_string(s) + "][" + std::to_string(a) +
                   "]: transition row sums to " + detail::fmt_num(sum));
        }
  }

  auto check_step_table = [&](const StepTable& t, const std::string& name) {
    if (t.horizon() != H || t.states() != S || t.actions() != A) {
      breach(name + " has wrong dimensions");
      return;
    }
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          if (!detail::in_unit(t(h, s, a)))
            breach(name + "[" + std::to_string(h) + "][" + std::to_string(s) + "][" +
                   std::to_string(a) + "]: mean out of [0,1] (" + detail::fmt_num(t(h, s, a)) +
                   ")");
  };
  check_step_table(model.reward_mean, "reward_mean");

  if (static_cast<int>(model.cost_mean.size()) != m) {
    breach("cost_mean has " + std::to_string(model.cost_mean.size()) + " tables, expected " +
           std::to_string(m));
  } else {
    for (int i = 0; i < m; ++i)
      check_step_table(model.cost_mean[i], "cost_mean[" + std::to_string(i) + "]");
  }

  if (static_cast<int>(model.threshold_mean.size()) != m) {
    breach("threshold_mean has " + std::to_string(model.threshold_mean.size()) +
           " rows, expected " + std::to_string(m));
  } else {
    for (int i = 0; i < m; ++i) {
      const auto& row = model.threshold_mean[i];
      if (static_cast<int>(row.size()) != H) {
        breach("threshold_mean[" + std::to_string(i) + "] has wrong length");
        continue;
      }
      for (int h = 0; h < H; ++h)
        if (!detail::in_unit(row[h]))
          breach("alpha[" + std::to_string(i) + "][" + std::to_string(h) +
                 "]: threshold mean out of [0,1] (" + detail::fmt_num(row[h]) + ")");
    }
  }

  if (model.noise.kind == NoiseKind::clipped_gaussian &&
      !(model.noise.sigma > 0.0 && std::isfinite(model.noise.sigma)))
    breach("clipped gaussian noise needs sigma > 0");
  return report;
}

/// Checks row sums and signs; throws DomainError naming the first bad row.
inline void check_policy(const Policy& policy, double tol = kInputTolerance) {
  for (int h = 0; h < policy.horizon(); ++h)
    for (int s = 0; s < policy.states(); ++s) {
      double sum = 0.0;
      for (double p : policy.probs.row(h, s)) {
        if (!(p >= 0.0) || !std::isfinite(p))
          throw DomainError("policy has a negative or non-finite entry at h=" + std::to_string(h) +
                            " s=" + std::to_string(s));
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol)
        throw DomainError("policy row h=" + std::to_string(h) + " s=" + std::to_string(s) +
                          " sums to " + detail::fmt_num(sum));
    }
}

/// Value of `policy` for `payoff` under an arbitrary kernel, from `initial_state`.
/// Backward induction with V_H = 0.
inline double exact_value(const TransitionTable& transition, int initial_state,
                          const Policy& policy, const StepTable& payoff) {
  const int H = transition.horizon(), S = transition.states(), A = transition.actions();
  detail::require_policy_shape(policy, H, S, A);
  if (payoff.horizon() != H || payoff.states() != S || payoff.actions() != A)
    throw StructuralError("payoff dimensions do not match the model");

  std::vector<double> next(static_cast<std::size_t>(S), 0.0), cur(static_cast<std::size_t>(S));
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        const double pa = policy(h, s, a);
        if (pa == 0.0) continue;
        auto row = transition.row(h, s, a);
        double q = payoff(h, s, a);
        for (int n = 0; n < S; ++n) q += row[n] * next[n];
        v += pa * q;
      }
      cur[s] = v;
    }
    std::swap(cur, next);
  }
  return next[static_cast<std::size_t>(initial_state)];
}

inline double exact_value(const CmdpModel& model, const Policy& policy, const StepTable& payoff) {
  return exact_value(model.transition, model.initial_state, policy, payoff);
}

/// Reward value and every constraint value of `policy` on the true means.
inline ValueVector exact_values(const CmdpModel& model, const Policy& policy) {
  ValueVector out;
  out.reward = exact_value(model, policy, model.reward_mean);
  out.cost.reserve(model.cost_mean.size());
  for (const auto& g : model.cost_mean) out.cost.push_back(exact_value(model, policy, g));
  return out;
}

inline OccupancyMeasure occupancy_of_policy(const TransitionTable& transition, int initial_state,
                                            const Policy& policy) {
  const int H = transition.horizon(), S = transition.states(), A = transition.actions();
  detail::require_policy_shape(policy, H, S, A);
  OccupancyMeasure q{StepTable(H, S, A)};
  if (H == 0) return q;

  std::vector<double> state_mass(static_cast<std::size_t>(S), 0.0);
  state_mass[static_cast<std::size_t>(initial_state)] = 1.0;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) q.mass(h, s, a) = state_mass[s] * policy(h, s, a);
    if (h + 1 == H) break;
    std::fill(state_mass.begin(), state_mass.end(), 0.0);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double w = q.mass(h, s, a);
        if (w == 0.0) continue;
        auto row = transition.row(h, s, a);
        for (int n = 0; n < S; ++n) state_mass[n] += w * row[n];
      }
  }
  return q;
}

inline OccupancyMeasure occupancy_of_policy(const CmdpModel& model, const Policy& policy) {
  return occupancy_of_policy(model.transition, model.initial_state, policy);
}

/// Conditional action distributions of `q`; states without mass get the
/// uniform distribution.
inline Policy policy_of_occupancy(const OccupancyMeasure& q) {
  const int H = q.mass.horizon(), S = q.mass.states(), A = q.mass.actions();
  Policy pi{StepTable(H, S, A)};
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      auto in = q.mass.row(h, s);
      double total = 0.0;
      for (double w : in) {
        if (w < 0.0)
          throw StructuralError("occupancy measure has negative mass at h=" + std::to_string(h) +
                                " s=" + std::to_string(s));
        total += w;
      }
      auto out = pi.probs.row(h, s);
      for (int a = 0; a < A; ++a) out[a] = total > 0.0 ? in[a] / total : 1.0 / A;
    }
  return pi;
}

/// <l, q>
inline double inner(const StepTable& payoff, const OccupancyMeasure& q) {
  if (!payoff.same_shape(q.mass)) throw StructuralError("inner: shape mismatch");
  double acc = 0.0;
  const auto& a = payoff.values();
  const auto& b = q.mass.values();
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

struct OptimalPolicy {
  double value = 0.0;
  Policy policy;  // deterministic, ties to the smallest action
};

/// Bellman optimum of `payoff` over all policies.
inline OptimalPolicy optimal_value(const TransitionTable& transition, int initial_state,
                                   const StepTable& payoff) {
  const int H = transition.horizon(), S = transition.states(), A = transition.actions();
  OptimalPolicy out{0.0, Policy{StepTable(H, S, A)}};
  std::vector<double> next(static_cast<std::size_t>(S), 0.0), cur(static_cast<std::size_t>(S));
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int a = 0; a < A; ++a) {
        auto row = transition.row(h, s, a);
        double q = payoff(h, s, a);
        for (int n = 0; n < S; ++n) q += row[n] * next[n];
        if (q > best) {
          best = q;
          arg = a;
        }
      }
      cur[s] = best;
      out.policy.probs(h, s, arg) = 1.0;
    }
    std::swap(cur, next);
  }
  out.value = next[static_cast<std::size_t>(initial_state)];
  return out;
}

}  // namespace spot
