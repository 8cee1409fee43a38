#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "spot/agent.hpp"

namespace spot {

/// Reward regret and constraint violation against the true thresholds.
struct RegretSeries {
  std::vector<double> regret;                  // V* - V_r^{pi_t}
  std::vector<std::vector<double>> violation;  // [i][t], alpha_i - V_gi^{pi_t}
  std::vector<double> cum_regret;
  std::vector<std::vector<double>> cum_violation;  // [i][t]
  std::vector<double> max_cum_violation;           // max_i cum_violation[i][t]
  long negative_regret_episodes = 0;               // pi_t beat pi*, only possible by violating
};

inline RegretSeries compute_regret(const RunLog& log, double optimal_reward,
                                   const std::vector<double>& alpha) {
  const std::size_t T = log.episodes.size();
  const std::size_t m = alpha.size();
  RegretSeries out;
  out.regret.resize(T);
  out.cum_regret.resize(T);
  out.violation.assign(m, std::vector<double>(T));
  out.cum_violation.assign(m, std::vector<double>(T));
  out.max_cum_violation.resize(T);

  double cum = 0.0;
  std::vector<double> cum_v(m, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& e = log.episodes[t];
    if (e.v_cost.size() != m) throw StructuralError("compute_regret: constraint count mismatch");
    out.regret[t] = optimal_reward - e.v_reward;
    if (out.regret[t] < 0.0) ++out.negative_regret_episodes;
    cum += out.regret[t];
    out.cum_regret[t] = cum;
    double worst = m == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      out.violation[i][t] = alpha[i] - e.v_cost[i];
      cum_v[i] += out.violation[i][t];
      out.cum_violation[i][t] = cum_v[i];
      worst = std::max(worst, cum_v[i]);
    }
    out.max_cum_violation[t] = worst;
  }
  return out;
}

struct SqrtFit {
  double coefficient = 0.0;
  double residual = 0.0;  // RMSE over the fitted half, relative to the RMS of the data
};

/// Least squares cum(t) ~ c sqrt(t) over the last half of the series
/// (t is 1-based, element k holds cum(k+1)).
inline SqrtFit sqrt_fit(std::span<const double> series) {
  if (series.size() < 100) throw DomainError("sqrt_fit: series needs at least 100 points");
  const std::size_t begin = series.size() / 2;
  double num = 0.0, den = 0.0;
  for (std::size_t k = begin; k < series.size(); ++k) {
    const double t = double(k + 1);
    num += series[k] * std::sqrt(t);
    den += t;
  }
  SqrtFit fit;
  fit.coefficient = num / den;
  double sq_err = 0.0, sq_data = 0.0;
  for (std::size_t k = begin; k < series.size(); ++k) {
    const double pred = fit.coefficient * std::sqrt(double(k + 1));
    sq_err += (series[k] - pred) * (series[k] - pred);
    sq_data += series[k] * series[k];
  }
  fit.residual = sq_data > 0.0 ? std::sqrt(sq_err / sq_data) : 0.0;
  return fit;
}

/// cum(2T') / cum(T'), T' 1-based. NaN when cum(T') is zero or T' out of range.
inline double doubling_ratio(std::span<const double> cumulative, std::size_t t_prime) {
  if (t_prime == 0 || 2 * t_prime > cumulative.size())
    return std::numeric_limits<double>::quiet_NaN();
  const double base = cumulative[t_prime - 1];
  if (base == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cumulative[2 * t_prime - 1] / base;
}

/// [x]_+ applied elementwise.
inline std::vector<double> positive_part(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  for (auto& x : out) x = std::max(x, 0.0);
  return out;
}

/// First 1-based episode from which the series stays <= 0, or 0 if the last
/// element is positive.
inline std::size_t nonpositive_from(std::span<const double> cumulative) {
  std::size_t k = cumulative.size();
  while (k > 0 && cumulative[k - 1] <= 0.0) --k;
  return k == cumulative.size() ? 0 : k + 1;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + mid);
  return 0.5 * (lo + hi);
}

/// Largest number of non-zero next-state entries over all (h,s,a).
inline int max_transition_support(const CmdpModel& model) {
  int best = 0;
  for (int h = 0; h < model.horizon; ++h)
    for (int s = 0; s < model.num_states; ++s)
      for (int a = 0; a < model.num_actions; ++a) {
        int nz = 0;
        for (double p : model.transition.row(h, s, a)) nz += p > 0.0;
        best = std::max(best, nz);
      }
  return best;
}

}  // namespace spot
