#pragma once

// JSON persistence for CmdpModel. Doubles are written with 17 significant
// digits, so a save/load round trip is bit-exact.

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "spot/cmdp.hpp"

namespace spot::io {

using nlohmann::json;

inline json model_to_json(const CmdpModel& model) {
  const int H = model.horizon, S = model.num_states, A = model.num_actions;
  json transition = json::array();
  for (int h = 0; h < H; ++h) {
    json by_state = json::array();
    for (int s = 0; s < S; ++s) {
      json by_action = json::array();
      for (int a = 0; a < A; ++a) {
        auto row = model.transition.row(h, s, a);
        by_action.push_back(json(std::vector<double>(row.begin(), row.end())));
      }
      by_state.push_back(std::move(by_action));
    }
    transition.push_back(std::move(by_state));
  }
  auto table = [&](const StepTable& t) {
    json out = json::array();
    for (int h = 0; h < H; ++h) {
      json by_state = json::array();
      for (int s = 0; s < S; ++s) {
        auto row = t.row(h, s);
        by_state.push_back(json(std::vector<double>(row.begin(), row.end())));
      }
      out.push_back(std::move(by_state));
    }
    return out;
  };
  json costs = json::array();
  for (const auto& g : model.cost_mean) costs.push_back(table(g));

  return json{
      {"states", S},
      {"actions", A},
      {"horizon", H},
      {"constraints", model.num_constraints},
      {"initial_state", model.initial_state},
      {"noise",
       {{"kind", model.noise.kind == NoiseKind::bernoulli ? "bernoulli" : "clipped_gaussian"},
        {"sigma", model.noise.sigma}}},
      {"transition", std::move(transition)},
      {"reward", table(model.reward_mean)},
      {"cost", std::move(costs)},
      {"threshold", model.threshold_mean},
  };
}

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw StructuralError(std::string("model file: missing field '") + key + "'");
  return j.at(key);
}

inline const json& index(const json& j, int k, std::size_t expected, const std::string& where) {
  if (!j.is_array() || j.size() != expected)
    throw StructuralError("model file: " + where + " must be an array of length " +
                          std::to_string(expected));
  return j.at(static_cast<std::size_t>(k));
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw StructuralError("model file: " + where + " must be a number");
  return j.get<double>();
}

inline StepTable read_table(const json& j, int H, int S, int A, const std::string& name) {
  StepTable out(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const std::string where = name + "[" + std::to_string(h) + "][" + std::to_string(s) + "]";
        const json& row = index(index(j, h, H, name), s, S, name + "[" + std::to_string(h) + "]");
        out(h, s, a) = number(index(row, a, A, where), where + "[" + std::to_string(a) + "]");
      }
  return out;
}

}  // namespace detail

/// Parses and shape-checks a model. Semantic checks (row sums, ranges) are
/// left to validate_model.
inline CmdpModel model_from_json(const json& j) {
  CmdpModel model;
  try {
    model.num_states = detail::field(j, "states").get<int>();
    model.num_actions = detail::field(j, "actions").get<int>();
    model.horizon = detail::field(j, "horizon").get<int>();
    model.num_constraints = detail::field(j, "constraints").get<int>();
    model.initial_state = j.value("initial_state", 0);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("model file: ") + e.what());
  }
  const int S = model.num_states, A = model.num_actions, H = model.horizon,
            m = model.num_constraints;
  if (S < 1 || A < 1 || H < 1 || m < 0)
    throw StructuralError("model file: dimensions must be positive");

  if (j.contains("noise")) {
    const json& noise = j.at("noise");
    const std::string kind = noise.value("kind", "bernoulli");
    if (kind == "bernoulli")
      model.noise.kind = NoiseKind::bernoulli;
    else if (kind == "clipped_gaussian")
      model.noise.kind = NoiseKind::clipped_gaussian;
    else
      throw StructuralError("model file: unknown noise kind '" + kind + "'");
    model.noise.sigma = noise.value("sigma", 0.0);
  }

  const json& tj = detail::field(j, "transition");
  model.transition = TransitionTable(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const std::string where = "transition[" + std::to_string(h) + "][" + std::to_string(s) +
                                  "][" + std::to_string(a) + "]";
        const json& row = detail::index(
            detail::index(detail::index(tj, h, H, "transition"), s, S, "transition[h]"), a, A,
            "transition[h][s]");
        for (int n = 0; n < S; ++n)
          model.transition(h, s, a, n) = detail::number(detail::index(row, n, S, where), where);
      }
  model.reward_mean = detail::read_table(detail::field(j, "reward"), H, S, A, "reward");

  const json& cj = detail::field(j, "cost");
  const json& aj = detail::field(j, "threshold");
  if (!cj.is_array() || cj.size() != static_cast<std::size_t>(m))
    throw StructuralError("model file: cost must hold one table per constraint");
  if (!aj.is_array() || aj.size() != static_cast<std::size_t>(m))
    throw StructuralError("model file: threshold must hold one row per constraint");
  for (int i = 0; i < m; ++i) {
    model.cost_mean.push_back(
        detail::read_table(cj.at(i), H, S, A, "cost[" + std::to_string(i) + "]"));
    std::vector<double> row(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h)
      row[h] = detail::number(detail::index(aj.at(i), h, H, "threshold[i]"),
                              "threshold[" + std::to_string(i) + "][" + std::to_string(h) + "]");
    model.threshold_mean.push_back(std::move(row));
  }
  return model;
}

inline std::string dump_model(const CmdpModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

inline CmdpModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("model file: ") + e.what());
  }
  return model_from_json(j);
}

inline CmdpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

inline void save_model(const CmdpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");
  out << dump_model(model);
}

}  // namespace spot::io
