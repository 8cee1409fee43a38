#pragma once

// Sweep orchestration: expands a config into grid points, runs each point on
// its own worker, writes one log per point and a summary table.

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "spot/agent.hpp"
#include "spot/harness/config.hpp"
#include "spot/harness/model_io.hpp"
#include "spot/metrics.hpp"
#include "spot/oracle.hpp"

namespace spot::harness {

inline constexpr const char* kOutputRootEnv = "SPOT_OUTPUT_ROOT";

/// Smallest rho handed to the agent when the Slater gap is zero.
inline constexpr double kRhoFloor = 1e-6;

/// Shortest decimal text that reads back to the same double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct GridPoint {
  std::uint64_t seed = 0;
  ThresholdMode mode = ThresholdMode::pessimistic;
  double gamma = 0.5;
  double xi = 0.0;  // meaningful for blended only

  ThresholdRule rule() const {
    switch (mode) {
      case ThresholdMode::pessimistic:
        return ThresholdRule::pessimistic();
      case ThresholdMode::optimistic:
        return ThresholdRule::optimistic();
      case ThresholdMode::blended:
        return ThresholdRule::blended(xi);
    }
    return ThresholdRule::pessimistic();
  }

  std::string name() const {
    std::string out = to_string(mode);
    if (mode == ThresholdMode::blended) out += "-xi" + fmt(xi);
    return out + "_g" + fmt(gamma) + "_s" + std::to_string(seed);
  }
};

/// Order: gamma, then mode (blended expands over xi), then seed.
inline std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg,
                                          std::uint64_t seed_offset = 0) {
  std::vector<GridPoint> grid;
  for (double gamma : cfg.gammas)
    for (ThresholdMode mode : cfg.modes) {
      const std::vector<double> xis =
          mode == ThresholdMode::blended ? cfg.xis : std::vector<double>{0.0};
      for (double xi : xis)
        for (std::uint64_t seed : cfg.seeds) grid.push_back({seed + seed_offset, mode, gamma, xi});
    }
  return grid;
}

/// Facts about the true model shared by every grid point.
struct ModelFacts {
  std::vector<double> alpha;
  double optimal_reward = 0.0;
  double rho = 1.0;
  std::vector<double> slater_slack;  // empty when unknown
};

inline ModelFacts model_facts(const CmdpModel& model, std::optional<double> rho_override) {
  ModelFacts facts;
  facts.alpha = model.episodic_thresholds();
  const auto lp = solve_optimal_occupancy(model, facts.alpha);
  if (!lp.optimal())
    throw SolverError(std::string("true model has no optimal policy (") + lp::to_string(lp.status) +
                      ")");
  facts.optimal_reward = lp.objective;
  std::optional<double> rho = rho_override;
  if (model.num_constraints > 0) {
    try {
      const auto report = slater_gap(model, facts.alpha);
      facts.slater_slack = report.slack;
      if (!rho) rho = std::max(report.rho, kRhoFloor);
    } catch (const NoSlaterPointError&) {
      if (!rho) throw;
    }
  }
  facts.rho = rho.value_or(1.0);
  return facts;
}

inline SpotConfig spot_config(const ExperimentConfig& cfg, const GridPoint& point,
                              const ModelFacts& facts) {
  SpotConfig sc;
  sc.episodes = cfg.episodes;
  sc.gamma = point.gamma;
  sc.delta = cfg.delta;
  sc.rule = point.rule();
  sc.policy_step = cfg.eta_policy;
  sc.dual_scale = cfg.eta_dual;
  sc.rho = facts.rho;
  sc.seed = point.seed;
  sc.disable_confidence = cfg.disable_confidence;
  sc.slater_slack = facts.slater_slack;
  return sc;
}

/// Episode log columns:
/// t,V_r,V_g_1..m,alpha_mode_1..m,lambda_1..m,cum_regret,cum_violation,breaches
/// alpha_mode is the threshold the agent used; cum_violation is the max over i.
inline void write_log(std::ostream& os, const RunLog& log, const RegretSeries& series) {
  const std::size_t m = log.final_lambda.size();
  os << "t,V_r";
  for (std::size_t i = 1; i <= m; ++i) os << ",V_g_" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",alpha_mode_" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",lambda_" << i;
  os << ",cum_regret,cum_violation,breaches\n";
  for (std::size_t k = 0; k < log.episodes.size(); ++k) {
    const auto& e = log.episodes[k];
    os << e.t << ',' << fmt(e.v_reward);
    for (double v : e.v_cost) os << ',' << fmt(v);
    for (double v : e.threshold) os << ',' << fmt(v);
    for (double v : e.lambda) os << ',' << fmt(v);
    os << ',' << fmt(series.cum_regret[k]) << ',' << fmt(series.max_cum_violation[k]) << ','
       << e.breaches.total() << '\n';
  }
}

struct SummaryRow {
  GridPoint point;
  bool ok = false;
  double final_regret = std::nan("");
  double final_violation = std::nan("");
  double regret_ratio = std::nan("");     // cum(T) / cum(T/2)
  double violation_ratio = std::nan("");  // same on [max_i cum violation]_+
  long breach_episodes = 0;
  double rho = std::nan("");
  std::string error;
};

inline constexpr const char* kSummaryHeader =
    "run,seed,mode,xi,gamma,status,final_regret,final_violation,regret_doubling_ratio,"
    "violation_doubling_ratio,breach_episodes,rho,error";

inline void write_summary_row(std::ostream& os, const SummaryRow& row) {
  std::string error = row.error;
  for (auto& c : error)
    if (c == ',' || c == '\n' || c == '"') c = ' ';
  const auto& p = row.point;
  os << p.name() << ',' << p.seed << ',' << to_string(p.mode) << ','
     << (p.mode == ThresholdMode::blended ? fmt(p.xi) : std::string()) << ',' << fmt(p.gamma) << ','
     << (row.ok ? "ok" : "failed") << ',' << fmt(row.final_regret) << ','
     << fmt(row.final_violation) << ',' << fmt(row.regret_ratio) << ',' << fmt(row.violation_ratio)
     << ',' << row.breach_episodes << ',' << fmt(row.rho) << ',' << error << '\n';
}

inline SummaryRow summarize(const GridPoint& point, const RunLog& log, const RegretSeries& series) {
  SummaryRow row;
  row.point = point;
  row.ok = true;
  const std::size_t T = log.episodes.size();
  row.final_regret = series.cum_regret.back();
  row.final_violation = series.max_cum_violation.back();
  row.regret_ratio = doubling_ratio(series.cum_regret, T / 2);
  const auto positive = positive_part(series.max_cum_violation);
  row.violation_ratio = doubling_ratio(positive, T / 2);
  for (const auto& e : log.episodes) row.breach_episodes += e.breaches.total() > 0;
  row.rho = log.rho;
  return row;
}

struct RunOptions {
  std::uint64_t seed_offset = 0;
  std::optional<std::filesystem::path> output_dir;  // overrides config and env
};

struct ExperimentSummary {
  std::filesystem::path output_dir;
  std::vector<SummaryRow> rows;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += !r.ok;
    return n;
  }
};

/// Relative directories are placed under $SPOT_OUTPUT_ROOT when it is set.
inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                                const RunOptions& opts) {
  if (opts.output_dir) return *opts.output_dir;
  std::filesystem::path dir(cfg.output_dir);
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && dir.is_relative())
    return std::filesystem::path(root) / dir;
  return dir;
}

namespace detail {

/// Writes through a temporary file so a failed point leaves no partial log.
template <typename F>
void write_atomically(const std::filesystem::path& path, F&& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    body(out);
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline SummaryRow run_point(const CmdpModel& model, const ModelFacts& facts,
                            const ExperimentConfig& cfg, const GridPoint& point,
                            const std::filesystem::path& dir) {
  const SpotConfig sc = spot_config(cfg, point, facts);
  std::optional<EstimatorState> last;
  EpisodeObserver observer;
  if (cfg.emit_snapshots)
    observer = [&](const EpisodeContext& ctx) {
      if (ctx.t == sc.episodes) last.emplace(ctx.estimator);
    };
  const RunLog log = run_spot(model, sc, observer);
  const RegretSeries series = compute_regret(log, facts.optimal_reward, facts.alpha);
  if (cfg.emit_logs)
    write_atomically(dir / ("log_" + point.name() + ".csv"),
                     [&](std::ostream& os) { write_log(os, log, series); });
  if (last)
    write_atomically(dir / ("snapshot_" + point.name() + ".csv"),
                     [&](std::ostream& os) { write_snapshot(os, *last); });
  return summarize(point, log, series);
}

}  // namespace detail

/// Runs every grid point. A failing point becomes a `failed` summary row and
/// never touches the files of other points. Output is independent of the
/// worker count.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  ExperimentSummary summary;
  summary.output_dir = resolve_output_dir(cfg, opts);
  std::filesystem::create_directories(summary.output_dir);

  const CmdpModel model = build_model(cfg.model);
  {
    const auto report = validate_model(model);
    if (!report.ok()) throw StructuralError("invalid model: " + report.breaches.front());
  }
  const ModelFacts facts = model_facts(model, cfg.rho);
  detail::write_atomically(summary.output_dir / "model.json",
                           [&](std::ostream& os) { os << io::dump_model(model); });

  const auto grid = expand_grid(cfg, opts.seed_offset);
  summary.rows.resize(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      try {
        summary.rows[k] = detail::run_point(model, facts, cfg, grid[k], summary.output_dir);
      } catch (const std::exception& e) {
        SummaryRow row;
        row.point = grid[k];
        row.rho = facts.rho;
        row.error = e.what();
        summary.rows[k] = row;
      }
    }
  };
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  detail::write_atomically(summary.output_dir / "summary.csv", [&](std::ostream& os) {
    os << kSummaryHeader << '\n';
    for (const auto& row : summary.rows) write_summary_row(os, row);
  });
  return summary;
}

}  // namespace spot::harness
