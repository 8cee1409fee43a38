// spot: command-line front end for the experiment harness.
//
//   spot validate <config.yaml | model.json>
//   spot run <config.yaml> [--seed-offset N] [--out DIR] [--workers N]
//   spot oracle (--config FILE | --model FILE | --generator NAME ...)
//   spot generate <chain|random> [params] -o model.json
//   spot plotdata <log.csv> [--stride K] [-o FILE]

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "spot/harness/config.hpp"
#include "spot/harness/experiment.hpp"
#include "spot/harness/model_io.hpp"
#include "spot/harness/plotdata.hpp"
#include "spot/metrics.hpp"
#include "spot/oracle.hpp"

namespace {

using namespace spot;
using nlohmann::json;

struct GeneratorArgs {
  std::string name;
  harness::ChainParams chain;
  harness::RandomParams random;

  void attach(CLI::App* app, bool positional) {
    if (positional)
      app->add_option("generator", name, "chain or random")
          ->required()
          ->check(CLI::IsMember({"chain", "random"}));
    else
      app->add_option("--generator", name, "chain or random")
          ->check(CLI::IsMember({"chain", "random"}));
    app->add_option("--length", chain.length, "chain length")->capture_default_str();
    app->add_option("--horizon", chain.horizon, "episode horizon H (chain default 6, random 5)");
    app->add_option("--constraints", chain.constraints, "number of constraints m");
    app->add_option("--states", random.states, "random: states")->capture_default_str();
    app->add_option("--actions", random.actions, "random: actions")->capture_default_str();
    app->add_option("--min-slack", random.min_slack, "random: required Slater slack")
        ->capture_default_str();
    app->add_option("--model-seed", random.seed, "random: generator seed")->capture_default_str();
  }

  harness::ModelSource source(const CLI::App* app) const {
    harness::ModelSource src;
    if (name == "chain") {
      src.kind = harness::ModelSource::Kind::chain;
      src.chain = chain;
    } else {
      src.kind = harness::ModelSource::Kind::random;
      src.random = random;
      if (app->count("--horizon")) src.random.horizon = chain.horizon;
      if (app->count("--constraints")) src.random.constraints = chain.constraints;
    }
    return src;
  }
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_validate(const std::string& path) {
  CmdpModel model;
  if (ends_with(path, ".json")) {
    model = io::load_model(path);
  } else {
    const auto cfg = harness::parse_config(path);
    model = harness::build_model(cfg.model);
    std::cout << "config ok: " << harness::expand_grid(cfg).size() << " grid points, "
              << cfg.episodes << " episodes each\n";
  }
  const auto report = validate_model(model);
  if (!report.ok()) {
    for (const auto& b : report.breaches) std::cerr << "model: " << b << '\n';
    return 1;
  }
  std::cout << "model ok: S=" << model.num_states << " A=" << model.num_actions
            << " H=" << model.horizon << " m=" << model.num_constraints
            << " max_support=" << max_transition_support(model) << '\n';
  return 0;
}

int cmd_run(const std::string& path, std::uint64_t seed_offset, const std::string& out,
            int workers) {
  auto cfg = harness::parse_config(path);
  if (workers > 0) cfg.workers = static_cast<unsigned>(workers);
  harness::RunOptions opts;
  opts.seed_offset = seed_offset;
  if (!out.empty()) opts.output_dir = out;
  const auto summary = harness::run_experiment(cfg, opts);
  std::cout << harness::kSummaryHeader << '\n';
  for (const auto& row : summary.rows) harness::write_summary_row(std::cout, row);
  std::cerr << summary.rows.size() << " runs, " << summary.failures() << " failed; output in "
            << summary.output_dir.string() << '\n';
  return summary.failures() == 0 ? 0 : 2;
}

json vector_json(const std::vector<double>& xs) { return json(xs); }

int cmd_oracle(const CmdpModel& model) {
  const auto report = validate_model(model);
  if (!report.ok()) {
    for (const auto& b : report.breaches) std::cerr << "model: " << b << '\n';
    return 1;
  }
  const auto alpha = model.episodic_thresholds();
  const auto lp = solve_optimal_occupancy(model, alpha);
  json out{{"status", lp::to_string(lp.status)},
           {"alpha", vector_json(alpha)},
           {"max_transition_support", max_transition_support(model)}};
  if (lp.optimal()) {
    out["optimal_reward"] = lp.objective;
    out["multipliers"] = vector_json(lp.multipliers);
    out["lp_dual_value"] = lp.dual_value;
    out["duality_gap"] = std::abs(lp.objective - lp.dual_value);
    out["lagrangian_dual_value"] = lagrangian_dual_value(model, lp.multipliers, alpha);
  }
  if (model.num_constraints > 0) {
    try {
      const auto s = slater_gap(model, alpha);
      out["slater"] = {{"max_min_slack", s.max_min_slack},
                       {"slack", vector_json(s.slack)},
                       {"rho", s.rho},
                       {"slater_reward", s.slater_reward}};
    } catch (const NoSlaterPointError& e) {
      out["slater"] = {{"error", e.what()}};
    }
  }
  std::cout << out.dump(2) << '\n';
  return lp.optimal() ? 0 : 3;
}

int cmd_plotdata(const std::string& path, long stride, const std::string& out_path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open log '" + path + "'");
  const auto data = harness::read_plot_data(in);
  if (out_path.empty()) {
    harness::write_plot_data(std::cout, data, stride);
  } else {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    harness::write_plot_data(out, data, stride);
  }
  if (data.t.size() >= 100)
    std::cerr << "sqrt fit: regret c=" << data.regret_fit.coefficient
              << " rel_rmse=" << data.regret_fit.residual
              << "; violation_plus c=" << data.violation_fit.coefficient
              << " rel_rmse=" << data.violation_fit.residual << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual learning for constrained MDPs with stochastic thresholds"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config file or a model file");
  validate->add_option("path", validate_path, "config (.yaml) or model (.json)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string run_path, run_out;
  std::uint64_t seed_offset = 0;
  int workers = 0;
  auto* run = app.add_subcommand("run", "run the sweep described by a config");
  run->add_option("config", run_path, "experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-offset", seed_offset, "added to every seed (for sharding)");
  run->add_option("--out", run_out, "output directory (overrides config and $SPOT_OUTPUT_ROOT)");
  run->add_option("--workers", workers, "worker threads (overrides config)");

  std::string oracle_config, oracle_model;
  GeneratorArgs oracle_gen;
  auto* oracle = app.add_subcommand("oracle", "LP optimum, duality certificate and Slater gap");
  oracle->add_option("--config", oracle_config, "take the model from a config")
      ->check(CLI::ExistingFile);
  oracle->add_option("--model", oracle_model, "model file (.json)")->check(CLI::ExistingFile);
  oracle_gen.attach(oracle, false);

  GeneratorArgs gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a generated model to a JSON file");
  gen.attach(generate, true);
  generate->add_option("-o,--output", gen_out, "model file to write")->required();

  std::string plot_path, plot_out;
  long stride = 1;
  auto* plot = app.add_subcommand("plotdata", "cumulative regret/violation against sqrt(t)");
  plot->add_option("log", plot_path, "episode log written by run")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--stride", stride, "keep every k-th episode")->check(CLI::PositiveNumber);
  plot->add_option("-o,--output", plot_out, "write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*run) return cmd_run(run_path, seed_offset, run_out, workers);
    if (*oracle) {
      const int sources = !oracle_config.empty() + !oracle_model.empty() + !oracle_gen.name.empty();
      if (sources != 1) {
        std::cerr << "oracle: give exactly one of --config, --model, --generator\n";
        return 1;
      }
      CmdpModel model;
      if (!oracle_config.empty())
        model = harness::build_model(harness::parse_config(oracle_config).model);
      else if (!oracle_model.empty())
        model = io::load_model(oracle_model);
      else
        model = harness::build_model(oracle_gen.source(oracle));
      return cmd_oracle(model);
    }
    if (*generate) {
      io::save_model(harness::build_model(gen.source(generate)), gen_out);
      return 0;
    }
    if (*plot) return cmd_plotdata(plot_path, stride, plot_out);
  } catch (const harness::ConfigValidationError& e) {
    for (const auto& issue : e.issues()) std::cerr << "config: " << issue << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
