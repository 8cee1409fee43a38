#pragma once

// Exact ground truth for a known model: the occupancy-measure LP, the Slater
// slack and gap, and brute-force enumeration of deterministic policies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "spot/cmdp.hpp"
#include "spot/simplex.hpp"

namespace spot {

struct LpSolution {
  lp::Status status = lp::Status::infeasible;
  OccupancyMeasure occupancy;
  double objective = 0.0;
  /// Lagrange multipliers of the threshold rows (>= 0).
  std::vector<double> multipliers;
  /// b^T y of the simplex dual certificate.
  double dual_value = 0.0;
  /// Worst violation of dual feasibility of the certificate.
  double dual_infeasibility = 0.0;

  bool optimal() const { return status == lp::Status::optimal; }
};

namespace detail {

inline int occupancy_var(const CmdpModel& model, int h, int s, int a) {
  return (h * model.num_states + s) * model.num_actions + a;
}

/// Flow-conservation rows over the first H*S*A variables of `lp`.
inline void add_flow_rows(const CmdpModel& model, lp::Problem& problem) {
  const int H = model.horizon, S = model.num_states, A = model.num_actions;
  for (int s = 0; s < S; ++s) {
    auto& row = problem.add_row(lp::Sense::equal, s == model.initial_state ? 1.0 : 0.0);
    for (int a = 0; a < A; ++a) row.coeffs[occupancy_var(model, 0, s, a)] = 1.0;
  }
  for (int h = 1; h < H; ++h)
    for (int next = 0; next < S; ++next) {
      auto& row = problem.add_row(lp::Sense::equal, 0.0);
      for (int a = 0; a < A; ++a) row.coeffs[occupancy_var(model, h, next, a)] = 1.0;
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          row.coeffs[occupancy_var(model, h - 1, s, a)] -= model.transition(h - 1, s, a, next);
    }
}

inline OccupancyMeasure unpack_occupancy(const CmdpModel& model, const std::vector<double>& x) {
  OccupancyMeasure q{StepTable(model.horizon, model.num_states, model.num_actions)};
  std::copy_n(x.begin(), q.mass.values().size(), q.mass.values().begin());
  return q;
}

inline void require_valid(const CmdpModel& model) {
  auto report = validate_model(model);
  if (!report.ok()) throw StructuralError("invalid model: " + report.breaches.front());
}

}  // namespace detail

/// max r^T q  s.t.  q is an occupancy measure,  G_i^T q >= thresholds_i.
inline LpSolution solve_optimal_occupancy(const CmdpModel& model,
                                          const std::vector<double>& thresholds) {
  detail::require_valid(model);
  const int m = model.num_constraints;
  if (static_cast<int>(thresholds.size()) != m)
    throw StructuralError("solve_optimal_occupancy: expected " + std::to_string(m) + " thresholds");
  const int n = model.horizon * model.num_states * model.num_actions;

  lp::Problem problem(n);
  problem.objective = model.reward_mean.values();
  detail::add_flow_rows(model, problem);
  const auto first_threshold_row = static_cast<int>(problem.rows.size());
  for (int i = 0; i < m; ++i) {
    auto& row = problem.add_row(lp::Sense::greater_equal, thresholds[i]);
    row.coeffs = model.cost_mean[i].values();
  }

  const lp::Result res = lp::solve(problem);
  LpSolution out;
  out.status = res.status;
  if (!res.x.empty() && res.status == lp::Status::optimal) {
    out.occupancy = detail::unpack_occupancy(model, res.x);
    out.objective = res.objective;
    out.dual_value = res.dual_objective;
    out.dual_infeasibility = lp::dual_infeasibility(problem, res.duals);
    out.multipliers.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out.multipliers[i] = -res.duals[first_threshold_row + i];
  }
  return out;
}

/// Lagrangian dual function D(lambda) = max_pi V_r + sum_i lambda_i (V_gi - alpha_i),
/// evaluated by dynamic programming on the combined payoff.
inline double lagrangian_dual_value(const CmdpModel& model, const std::vector<double>& lambda,
                                    const std::vector<double>& thresholds) {
  StepTable payoff = model.reward_mean;
  double offset = 0.0;
  for (int i = 0; i < model.num_constraints; ++i) {
    const auto& g = model.cost_mean[i].values();
    auto& l = payoff.values();
    for (std::size_t k = 0; k < l.size(); ++k) l[k] += lambda[i] * g[k];
    offset += lambda[i] * thresholds[i];
  }
  return optimal_value(model.transition, model.initial_state, payoff).value - offset;
}

struct SlaterReport {
  double max_min_slack = 0.0;  // tau*
  std::vector<double> slack;   // xi_i at the max-min solution
  double rho = 0.0;
  Policy slater_policy;
  double slater_reward = 0.0;
  double optimal_reward = 0.0;
};

/// Max-min slack point and the gap rho = (V* - V^{pi0}) / min_i xi_i.
inline SlaterReport slater_gap(const CmdpModel& model, const std::vector<double>& thresholds,
                               double min_slack_tol = 1e-9) {
  detail::require_valid(model);
  const int m = model.num_constraints;
  if (m == 0) throw NoSlaterPointError("slater_gap: model has no constraints");
  if (static_cast<int>(thresholds.size()) != m)
    throw StructuralError("slater_gap: expected " + std::to_string(m) + " thresholds");

  // tau enters shifted by H so that it is non-negative: tau' = tau + H.
  const int n = model.horizon * model.num_states * model.num_actions;
  const double H = model.horizon;
  lp::Problem problem(n + 1);
  problem.objective[n] = 1.0;
  detail::add_flow_rows(model, problem);
  for (int i = 0; i < m; ++i) {
    auto& row = problem.add_row(lp::Sense::greater_equal, thresholds[i] - H);
    std::copy(model.cost_mean[i].values().begin(), model.cost_mean[i].values().end(),
              row.coeffs.begin());
    row.coeffs[n] = -1.0;
  }
  const lp::Result res = lp::solve(problem);
  if (res.status != lp::Status::optimal)
    throw SolverError(std::string("slater_gap: slack LP ") + lp::to_string(res.status));

  SlaterReport out;
  out.max_min_slack = res.x[n] - H;
  if (out.max_min_slack <= min_slack_tol)
    throw NoSlaterPointError("no Slater point: max-min slack is " +
                             detail::fmt_num(out.max_min_slack));

  const OccupancyMeasure q = detail::unpack_occupancy(model, res.x);
  out.slack.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) out.slack[i] = inner(model.cost_mean[i], q) - thresholds[i];
  out.slater_policy = policy_of_occupancy(q);
  out.slater_reward = inner(model.reward_mean, q);

  const LpSolution opt = solve_optimal_occupancy(model, thresholds);
  out.optimal_reward = opt.objective;
  const double gap = out.optimal_reward - out.slater_reward;
  const double min_slack = *std::min_element(out.slack.begin(), out.slack.end());
  out.rho = gap <= kComputedTolerance ? 0.0 : gap / min_slack;
  return out;
}

struct EnumeratedPolicy {
  Policy policy;
  ValueVector values;
};

/// (A^S)^H, saturating at UINT64_MAX.
inline std::uint64_t deterministic_policy_count(const CmdpModel& model) {
  std::uint64_t count = 1;
  const auto limit = std::numeric_limits<std::uint64_t>::max();
  const int digits = model.horizon * model.num_states;
  for (int d = 0; d < digits; ++d) {
    if (count > limit / static_cast<std::uint64_t>(model.num_actions)) return limit;
    count *= static_cast<std::uint64_t>(model.num_actions);
  }
  return count;
}

/// Calls `visit` once per deterministic step-indexed policy, in mixed-radix
/// order over (h, s) with the action of (H-1, S-1) varying fastest.
inline void for_each_deterministic_policy(
    const CmdpModel& model, const std::function<void(const Policy&, const ValueVector&)>& visit,
    std::uint64_t guard = 1'000'000) {
  const std::uint64_t count = deterministic_policy_count(model);
  if (count > guard)
    throw DomainError("enumeration refused: " + std::to_string(count) +
                      " deterministic policies exceed the guard of " + std::to_string(guard));
  const int H = model.horizon, S = model.num_states, A = model.num_actions;
  const int digits = H * S;
  std::vector<int> choice(static_cast<std::size_t>(digits), 0);
  Policy pi{StepTable(H, S, A)};
  for (int d = 0; d < digits; ++d) pi.probs(d / S, d % S, 0) = 1.0;

  for (std::uint64_t k = 0; k < count; ++k) {
    visit(pi, exact_values(model, pi));
    for (int d = digits - 1; d >= 0; --d) {
      const int h = d / S, s = d % S;
      pi.probs(h, s, choice[d]) = 0.0;
      choice[d] = (choice[d] + 1) % A;
      pi.probs(h, s, choice[d]) = 1.0;
      if (choice[d] != 0) break;
    }
  }
}

inline std::vector<EnumeratedPolicy> enumerate_deterministic_policies(
    const CmdpModel& model, std::uint64_t guard = 1'000'000) {
  std::vector<EnumeratedPolicy> out;
  for_each_deterministic_policy(
      model, [&](const Policy& p, const ValueVector& v) { out.push_back({p, v}); }, guard);
  return out;
}

}  // namespace spot
