#pragma once

// Experiment configuration: a strict YAML schema. Every problem found in a
// file is reported, each with its key path and source line.
//
//   model:                  # exactly one of generator / file
//     generator: chain      # chain: length, horizon, constraints
//     length: 5             # random: states, actions, horizon, constraints,
//     horizon: 6            #         min_slack, seed
//     constraints: 1
//   episodes: 2000
//   delta: 0.05
//   rho: auto               # or a positive number
//   eta_policy: 0.01        # optional
//   eta_dual: 50            # optional
//   disable_confidence: false
//   seeds: [1, 2, 3]
//   modes: [pessimistic, optimistic, blended]
//   gammas: [0.5]
//   xis: [0.5]              # only used by blended
//   workers: 0              # 0 = hardware concurrency
//   output:
//     directory: out
//     logs: true
//     snapshots: false

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spot/agent.hpp"
#include "spot/errors.hpp"
#include "spot/generators.hpp"
#include "spot/harness/model_io.hpp"

namespace spot::harness {

struct ChainParams {
  int length = 5;
  int horizon = 6;
  int constraints = 1;
};

struct RandomParams {
  int states = 5;
  int actions = 3;
  int horizon = 5;
  int constraints = 2;
  double min_slack = 0.5;
  std::uint64_t seed = 0;
};

struct ModelSource {
  enum class Kind { chain, random, file };
  Kind kind = Kind::chain;
  ChainParams chain;
  RandomParams random;
  std::string path;  // resolved against the config file's directory
};

struct ExperimentConfig {
  ModelSource model;
  long episodes = 1000;
  double delta = 0.05;
  std::optional<double> rho;  // nullopt: Slater gap of the true model
  std::optional<double> eta_policy;
  std::optional<double> eta_dual;
  bool disable_confidence = false;
  std::vector<std::uint64_t> seeds{0};
  std::vector<ThresholdMode> modes{ThresholdMode::pessimistic};
  std::vector<double> gammas{0.5};
  std::vector<double> xis{0.5};
  unsigned workers = 0;
  std::string output_dir = "spot-out";
  bool emit_logs = true;
  bool emit_snapshots = false;
};

/// All problems of one config file.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<std::string> issues)
      : ConfigError(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : "\n") + x;
    return out;
  }
  std::vector<std::string> issues_;
};

inline const char* to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::pessimistic:
      return "pessimistic";
    case ThresholdMode::optimistic:
      return "optimistic";
    case ThresholdMode::blended:
      return "blended";
  }
  return "?";
}

inline std::optional<ThresholdMode> parse_mode(const std::string& s) {
  if (s == "pessimistic") return ThresholdMode::pessimistic;
  if (s == "optimistic") return ThresholdMode::optimistic;
  if (s == "blended") return ThresholdMode::blended;
  return std::nullopt;
}

namespace detail {

class Reader {
 public:
  std::vector<std::string> issues;

  void fail(const YAML::Node& node, const std::string& path, const std::string& reason) {
    std::string msg = reason + " (at " + path;
    if (node.Mark().line >= 0) msg += ", line " + std::to_string(node.Mark().line + 1);
    issues.push_back(msg + ")");
  }

  void check_keys(const YAML::Node& map, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, path.empty() ? key : path + "." + key, "unknown key");
    }
  }

  template <typename T>
  std::optional<T> scalar(const YAML::Node& node, const std::string& path, const char* type) {
    if (!node.IsScalar()) {
      fail(node, path, std::string("expected ") + type);
      return std::nullopt;
    }
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path, std::string("expected ") + type + ", got '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<long long> integer(const YAML::Node& n, const std::string& p) {
    return scalar<long long>(n, p, "integer");
  }
  std::optional<double> real(const YAML::Node& n, const std::string& p) {
    return scalar<double>(n, p, "number");
  }
  std::optional<bool> boolean(const YAML::Node& n, const std::string& p) {
    return scalar<bool>(n, p, "boolean");
  }
  std::optional<std::string> text(const YAML::Node& n, const std::string& p) {
    return scalar<std::string>(n, p, "string");
  }

  template <typename F>
  void sequence(const YAML::Node& node, const std::string& path, F&& each) {
    if (!node.IsSequence()) {
      fail(node, path, "expected a list");
      return;
    }
    if (node.size() == 0) fail(node, path, "list must not be empty");
    for (std::size_t k = 0; k < node.size(); ++k)
      each(node[k], path + "[" + std::to_string(k) + "]");
  }

  void positive_int(const YAML::Node& parent, const char* key, const std::string& path, int& out,
                    int min = 1) {
    if (!parent[key]) return;
    if (auto v = integer(parent[key], path + "." + key)) {
      if (*v < min || *v > 1'000'000)
        fail(parent[key], path + "." + key, "must be an integer >= " + std::to_string(min));
      else
        out = static_cast<int>(*v);
    }
  }
};

inline void read_model(Reader& r, const YAML::Node& node, const std::filesystem::path& base,
                       ModelSource& out) {
  if (!node.IsMap()) {
    r.fail(node, "model", "expected a mapping");
    return;
  }
  const bool has_gen = bool(node["generator"]), has_file = bool(node["file"]);
  if (has_gen == has_file) {
    r.fail(node, "model", "exactly one of 'generator' or 'file' is required");
    return;
  }
  if (has_file) {
    r.check_keys(node, "model", {"file"});
    if (auto p = r.text(node["file"], "model.file")) {
      std::filesystem::path path(*p);
      out.kind = ModelSource::Kind::file;
      out.path = (path.is_relative() ? base / path : path).string();
    }
    return;
  }
  const auto gen = r.text(node["generator"], "model.generator");
  if (!gen) return;
  if (*gen == "chain") {
    out.kind = ModelSource::Kind::chain;
    r.check_keys(node, "model", {"generator", "length", "horizon", "constraints"});
    r.positive_int(node, "length", "model", out.chain.length, 2);
    r.positive_int(node, "horizon", "model", out.chain.horizon);
    r.positive_int(node, "constraints", "model", out.chain.constraints, 0);
    if (out.chain.horizon < out.chain.length)
      r.fail(node, "model.horizon", "chain horizon must be >= length");
  } else if (*gen == "random") {
    out.kind = ModelSource::Kind::random;
    r.check_keys(node, "model",
                 {"generator", "states", "actions", "horizon", "constraints", "min_slack", "seed"});
    r.positive_int(node, "states", "model", out.random.states);
    r.positive_int(node, "actions", "model", out.random.actions);
    r.positive_int(node, "horizon", "model", out.random.horizon);
    r.positive_int(node, "constraints", "model", out.random.constraints, 0);
    if (node["min_slack"])
      if (auto v = r.real(node["min_slack"], "model.min_slack")) {
        if (!(*v >= 0.0)) r.fail(node["min_slack"], "model.min_slack", "must be >= 0");
        out.random.min_slack = *v;
      }
    if (node["seed"])
      if (auto v = r.integer(node["seed"], "model.seed")) {
        if (*v < 0) r.fail(node["seed"], "model.seed", "must be >= 0");
        out.random.seed = static_cast<std::uint64_t>(*v);
      }
  } else {
    r.fail(node["generator"], "model.generator", "unknown generator '" + *gen + "'");
  }
}

}  // namespace detail

/// `base` anchors relative model paths.
inline ExperimentConfig parse_config_node(const YAML::Node& root,
                                          const std::filesystem::path& base = ".") {
  detail::Reader r;
  ExperimentConfig cfg;
  if (!root.IsMap()) throw ConfigValidationError({"config must be a mapping (at <root>)"});
  r.check_keys(root, "",
               {"model", "episodes", "delta", "rho", "eta_policy", "eta_dual", "disable_confidence",
                "seeds", "modes", "gammas", "xis", "workers", "output"});

  if (!root["model"])
    r.fail(root, "model", "missing required key");
  else
    detail::read_model(r, root["model"], base, cfg.model);

  if (root["episodes"])
    if (auto v = r.integer(root["episodes"], "episodes")) {
      if (*v < 1) r.fail(root["episodes"], "episodes", "episodes must be >= 1");
      cfg.episodes = static_cast<long>(*v);
    }
  if (root["delta"])
    if (auto v = r.real(root["delta"], "delta")) {
      if (!(*v > 0.0 && *v < 1.0)) r.fail(root["delta"], "delta", "δ must lie in (0,1)");
      cfg.delta = *v;
    }
  if (root["rho"]) {
    const auto& n = root["rho"];
    if (!(n.IsScalar() && n.Scalar() == "auto"))
      if (auto v = r.real(n, "rho")) {
        if (!(*v > 0.0)) r.fail(n, "rho", "ρ must be > 0");
        cfg.rho = *v;
      }
  }
  auto positive_opt = [&](const char* key, const char* what, std::optional<double>& out) {
    if (!root[key]) return;
    if (auto v = r.real(root[key], key)) {
      if (!(*v > 0.0)) r.fail(root[key], key, std::string(what) + " must be > 0");
      out = *v;
    }
  };
  positive_opt("eta_policy", "η_t", cfg.eta_policy);
  positive_opt("eta_dual", "η_λ", cfg.eta_dual);
  if (root["disable_confidence"])
    if (auto v = r.boolean(root["disable_confidence"], "disable_confidence"))
      cfg.disable_confidence = *v;

  if (root["seeds"]) {
    cfg.seeds.clear();
    std::set<std::uint64_t> seen;
    bool duplicate = false;
    r.sequence(root["seeds"], "seeds", [&](const YAML::Node& n, const std::string& p) {
      if (auto v = r.integer(n, p)) {
        if (*v < 0) {
          r.fail(n, p, "seeds must be >= 0");
          return;
        }
        const auto seed = static_cast<std::uint64_t>(*v);
        if (!seen.insert(seed).second) duplicate = true;
        cfg.seeds.push_back(seed);
      }
    });
    if (duplicate) r.fail(root["seeds"], "seeds", "seeds must be distinct");
  }
  if (root["modes"]) {
    cfg.modes.clear();
    r.sequence(root["modes"], "modes", [&](const YAML::Node& n, const std::string& p) {
      if (auto v = r.text(n, p)) {
        if (auto mode = parse_mode(*v))
          cfg.modes.push_back(*mode);
        else
          r.fail(n, p, "unknown mode '" + *v + "' (pessimistic, optimistic, blended)");
      }
    });
  }
  if (root["gammas"]) {
    cfg.gammas.clear();
    r.sequence(root["gammas"], "gammas", [&](const YAML::Node& n, const std::string& p) {
      if (auto v = r.real(n, p)) {
        if (!(*v > 0.0 && *v <= 1.0)) r.fail(n, p, "γ must lie in (0,1]");
        cfg.gammas.push_back(*v);
      }
    });
  }
  if (root["xis"]) {
    cfg.xis.clear();
    r.sequence(root["xis"], "xis", [&](const YAML::Node& n, const std::string& p) {
      if (auto v = r.real(n, p)) {
        if (!(*v >= 0.0 && *v <= 1.0)) r.fail(n, p, "ξ must lie in [0,1]");
        cfg.xis.push_back(*v);
      }
    });
  }
  if (root["workers"])
    if (auto v = r.integer(root["workers"], "workers")) {
      if (*v < 0 || *v > 4096)
        r.fail(root["workers"], "workers", "must lie in [0,4096]");
      else
        cfg.workers = static_cast<unsigned>(*v);
    }
  if (const auto& out = root["output"]) {
    if (!out.IsMap()) {
      r.fail(out, "output", "expected a mapping");
    } else {
      r.check_keys(out, "output", {"directory", "logs", "snapshots"});
      if (out["directory"])
        if (auto v = r.text(out["directory"], "output.directory")) cfg.output_dir = *v;
      if (out["logs"])
        if (auto v = r.boolean(out["logs"], "output.logs")) cfg.emit_logs = *v;
      if (out["snapshots"])
        if (auto v = r.boolean(out["snapshots"], "output.snapshots")) cfg.emit_snapshots = *v;
    }
  }

  if (!r.issues.empty()) throw ConfigValidationError(std::move(r.issues));
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text,
                                            const std::filesystem::path& base = ".") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigValidationError(
        {"YAML syntax error: " + e.msg + " (line " + std::to_string(e.mark.line + 1) + ")"});
  }
  return parse_config_node(root, base);
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("config file '" + path.string() + "' does not exist");
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::ParserException& e) {
    throw ConfigValidationError({path.string() + ": YAML syntax error: " + e.msg + " (line " +
                                 std::to_string(e.mark.line + 1) + ")"});
  }
  return parse_config_node(root, path.parent_path().empty() ? "." : path.parent_path());
}

inline CmdpModel build_model(const ModelSource& source) {
  switch (source.kind) {
    case ModelSource::Kind::chain:
      return make_chain_cmdp(source.chain.length, source.chain.horizon, source.chain.constraints);
    case ModelSource::Kind::random: {
      RngStream rng(source.random.seed, 1);
      const auto& p = source.random;
      return make_random_cmdp(p.states, p.actions, p.horizon, p.constraints, p.min_slack, rng);
    }
    case ModelSource::Kind::file:
      return io::load_model(source.path);
  }
  throw ConfigError("unknown model source");
}

}  // namespace spot::harness
