#include "gridsec/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace gridsec {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

json toml_value(const std::string& raw) {
  std::string v = trim(raw);
  if (v.empty()) throw ParseError("empty value in config");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ParseError("unterminated string in config: " + v);
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') throw ParseError("unterminated array in config: " + v);
    json arr = json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) arr.push_back(toml_value(item));
    }
    return arr;
  }
  try {
    size_t used = 0;
    if (v.find('.') == std::string::npos && v.find('e') == std::string::npos) {
      long long n = std::stoll(v, &used);
      if (used == v.size()) return n;
    }
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ParseError("bad config value: " + v);
}

json parse_toml_subset(std::istream& in) {
  json root = json::object();
  json* section = &root;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find('#'); cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("bad section header at line " + std::to_string(lineno));
      std::string name = trim(line.substr(1, line.size() - 2));
      root[name] = json::object();
      section = &root[name];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    (*section)[key] = toml_value(line.substr(eq + 1));
  }
  return root;
}

void apply_train(const json& j, TrainConfig& t) {
  t.alpha = j.value("alpha", t.alpha);
  t.gamma = j.value("gamma", t.gamma);
  t.hidden_neurons = j.value("hidden_neurons", t.hidden_neurons);
  t.hidden_layers = j.value("hidden_layers", t.hidden_layers);
  t.max_steps = j.value("max_steps", t.max_steps);
  t.max_episodes = j.value("max_episodes", t.max_episodes);
  t.replay_capacity = j.value("replay_capacity", t.replay_capacity);
  t.epsilon_final = j.value("epsilon_final", t.epsilon_final);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.sync_every = j.value("sync_every", t.sync_every);
  t.total_train_steps = j.value("total_train_steps", t.total_train_steps);
  t.seed = j.value("seed", t.seed);
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) throw ParseError("config must be an object");
  cfg.case_path = j.value("case", cfg.case_path);
  cfg.import_matrix = j.value("import_matrix", cfg.import_matrix);
  cfg.rating_floor_mw = j.value("rating_floor_mw", cfg.rating_floor_mw);
  if (j.contains("scheme")) cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  cfg.overrides_path = j.value("overrides", cfg.overrides_path);
  if (j.contains("pair") && !j.at("pair").is_null()) {
    auto p = j.at("pair");
    if (!p.is_array() || p.size() != 2)
      throw ParseError("config 'pair' must be a two-element array of branch ids");
    cfg.pair = {p[0].get<int>(), p[1].get<int>()};
  }
  cfg.pair_rank = j.value("pair_rank", cfg.pair_rank);
  cfg.starts = j.value("starts", cfg.starts);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();

  if (j.contains("wind")) {
    const auto& w = j.at("wind");
    cfg.wind_path = w.value("path", cfg.wind_path);
    cfg.scenario = w.value("scenario", cfg.scenario);
    cfg.minute = w.value("minute", cfg.minute);
    if (w.contains("farms")) cfg.farm_buses = w.at("farms").get<std::vector<int>>();
  }
  if (j.contains("env")) {
    const auto& e = j.at("env");
    cfg.gamma = e.value("gamma", cfg.gamma);
    cfg.gen_floor = e.value("gen_floor", cfg.gen_floor);
    cfg.terminal_bonus = e.value("terminal_bonus", cfg.terminal_bonus);
    cfg.env_max_steps = e.value("max_steps", cfg.env_max_steps);
  }
  // training inherits the run seed and discount unless the section overrides them
  cfg.train.gamma = cfg.gamma;
  cfg.train.seed = cfg.seed;
  if (j.contains("train")) apply_train(j.at("train"), cfg.train);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  bool toml = path.size() > 5 && path.substr(path.size() - 5) == ".toml";
  json j;
  if (toml) {
    j = parse_toml_subset(in);
  } else {
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  return config_from_json(j);
}

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["case"] = cfg.case_path;
  j["import_matrix"] = cfg.import_matrix;
  j["rating_floor_mw"] = cfg.rating_floor_mw;
  j["scheme"] = to_string(cfg.scheme);
  if (!cfg.overrides_path.empty()) j["overrides"] = cfg.overrides_path;
  if (cfg.pair)
    j["pair"] = {cfg.pair->first, cfg.pair->second};
  else
    j["pair_rank"] = cfg.pair_rank;
  j["starts"] = cfg.starts;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  j["methods"] = cfg.methods;
  if (!cfg.wind_path.empty()) {
    j["wind"] = {{"path", cfg.wind_path},
                 {"scenario", cfg.scenario},
                 {"minute", cfg.minute},
                 {"farms", cfg.farm_buses}};
  }
  j["env"] = {{"gamma", cfg.gamma},
              {"gen_floor", cfg.gen_floor},
              {"terminal_bonus", cfg.terminal_bonus},
              {"max_steps", cfg.env_max_steps}};
  j["train"] = {{"alpha", cfg.train.alpha},
                {"gamma", cfg.train.gamma},
                {"hidden_neurons", cfg.train.hidden_neurons},
                {"hidden_layers", cfg.train.hidden_layers},
                {"max_steps", cfg.train.max_steps},
                {"max_episodes", cfg.train.max_episodes},
                {"replay_capacity", cfg.train.replay_capacity},
                {"epsilon_final", cfg.train.epsilon_final},
                {"batch_size", cfg.train.batch_size},
                {"sync_every", cfg.train.sync_every},
                {"total_train_steps", cfg.train.total_train_steps},
                {"seed", cfg.train.seed}};
  return j;
}

std::pair<int, int> parse_pair_spec(const std::string& text, const PowerNetwork& net) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    throw ConfigError("pair spec '" + text +
                      "' needs two branches separated by a comma");
  auto resolve = [&net](const std::string& raw) {
    std::string tok = trim(raw);
    if (tok.empty()) throw ConfigError("empty branch in pair spec");
    auto dash = tok.find('-');
    if (dash != std::string::npos) {
      int a, b;
      try {
        a = std::stoi(tok.substr(0, dash));
        b = std::stoi(tok.substr(dash + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad endpoint pair '" + tok + "'");
      }
      for (const auto& br : net.branches)
        if ((br.from_bus == a && br.to_bus == b) || (br.from_bus == b && br.to_bus == a))
          return br.id;
      throw ConfigError("no branch joins buses " + std::to_string(a) + " and " +
                        std::to_string(b));
    }
    int id;
    try {
      id = std::stoi(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad branch id '" + tok + "'");
    }
    for (const auto& br : net.branches)
      if (br.id == id) return id;
    throw ConfigError("branch id " + std::to_string(id) + " not in network");
  };
  int x = resolve(text.substr(0, comma));
  int y = resolve(text.substr(comma + 1));
  if (x == y) throw ConfigError("pair spec names the same branch twice");
  return {x, y};
}

void check_config(const RunConfig& cfg) {
  if (cfg.case_path.empty()) throw ConfigError("no case file given");
  if (!std::ifstream(cfg.case_path)) throw ConfigError("case file not found: " + cfg.case_path);
  if (!cfg.wind_path.empty()) {
    if (!std::ifstream(cfg.wind_path))
      throw ConfigError("wind file not found: " + cfg.wind_path);
    if (cfg.farm_buses.empty())
      throw ConfigError("wind scenario needs a farm bus mapping");
  }
  if (!cfg.overrides_path.empty() && !std::ifstream(cfg.overrides_path))
    throw ConfigError("override file not found: " + cfg.overrides_path);
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw ConfigError("gamma must lie in [0,1]");
  if (cfg.gen_floor < 0.0) throw ConfigError("gen_floor must be nonnegative");
  if (cfg.starts <= 0) throw ConfigError("starts must be positive");
  if (cfg.pair_rank <= 0) throw ConfigError("pair_rank must be positive");
  if (cfg.env_max_steps <= 0) throw ConfigError("env max_steps must be positive");
  if (cfg.threads <= 0) throw ConfigError("threads must be positive");
  if (cfg.methods.empty()) throw ConfigError("no methods selected");
  for (const auto& m : cfg.methods)
    if (m != "dqn-cvss" && m != "dqn-ivss" && m != "random" && m != "dfs" &&
        m != "dijkstra")
      throw ConfigError("unknown method '" + m + "'");
}

}  // namespace gridsec
