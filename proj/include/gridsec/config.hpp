#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gridsec/cvss.hpp"
#include "gridsec/dqn.hpp"
#include "gridsec/network.hpp"

namespace gridsec {

struct RunConfig {
  std::string case_path;
  bool import_matrix = false;
  double rating_floor_mw = 10.0;

  std::string wind_path;  // empty = no injection scenario
  std::string scenario = "SC7";
  double minute = 0.0;
  std::vector<int> farm_buses;

  ScoringScheme scheme = ScoringScheme::Cvss31;
  std::string overrides_path;

  std::optional<std::pair<int, int>> pair;  // explicit branch ids
  int pair_rank = 1;  // 1-based rank into the severity-ordered overload pairs

  double gamma = 0.9;
  double gen_floor = 0.05;
  double terminal_bonus = 10.0;
  int env_max_steps = 1000;

  TrainConfig train;

  std::vector<std::string> methods = {"dqn-cvss", "random", "dfs", "dijkstra"};
  int starts = 5;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 1;
};

// `.toml` files use a flat key = value subset with [wind]/[env]/[train]
// sections; anything else is read as JSON with the same structure
RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

// two branches separated by a comma, each a branch id ("3,17") or an
// endpoint pair ("2-3,25-26")
std::pair<int, int> parse_pair_spec(const std::string& text, const PowerNetwork& net);

void check_config(const RunConfig& cfg);

}  // namespace gridsec
