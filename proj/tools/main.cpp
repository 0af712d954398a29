#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gridsec/baselines.hpp"
#include "gridsec/report.hpp"
#include "gridsec/wind.hpp"

namespace fs = std::filesystem;
using namespace gridsec;
using nlohmann::ordered_json;

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad integer list entry '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_str_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

struct CliState {
  std::string config_path;
  RunConfig cfg;

  std::string case_path;
  bool matrix = false;
  std::string wind_path, scenario, farms, pair_spec, methods, overrides;
  double minute = 0.0, gamma = 0.0, gen_floor = 0.0, bonus = 0.0, rating_floor = 0.0;
  double alpha = 0.0, eps_final = 0.0;
  int pair_rank = 0, starts = 0, env_max_steps = 0, episodes = 0, ep_steps = 0;
  int train_steps = 0, hidden = 0, layers = 0, batch = 0, sync = 0, replay = 0;
  std::uint64_t seed = 0;
  std::string out_dir, scheme;
  int threads = 0;
  bool dry_run = false;
  bool oracle = false;
  bool weighted = false;
  std::string out_file;
  std::string method;

  void load_base() {
    if (!config_path.empty()) cfg = load_config(config_path);
  }
};

void add_case_options(CLI::App* cmd, CliState& st,
                      std::map<std::string, CLI::Option*>& opts) {
  opts["case"] = cmd->add_option("--case", st.case_path, "case file (JSON schema)");
  opts["matrix"] =
      cmd->add_flag("--matrix", st.matrix, "treat --case as matrix-format text");
  opts["rating_floor"] = cmd->add_option("--rating-floor", st.rating_floor,
                                         "floor MW for branches without ratings");
  opts["wind"] = cmd->add_option("--wind", st.wind_path, "wind series CSV");
  opts["scenario"] =
      cmd->add_option("--scenario", st.scenario, "injection scenario label (SC1..)");
  opts["minute"] = cmd->add_option("--minute", st.minute, "timestamp within the series");
  opts["farms"] =
      cmd->add_option("--farms", st.farms, "comma list of farm buses, column order");
}

void add_pair_options(CLI::App* cmd, CliState& st,
                      std::map<std::string, CLI::Option*>& opts) {
  opts["pair"] = cmd->add_option(
      "--pair", st.pair_spec, "target pair: branch ids '3,17' or endpoints '2-3,25-26'");
  opts["pair_rank"] = cmd->add_option("--pair-rank", st.pair_rank,
                                      "1-based rank into the severity-ordered pairs");
}

void add_env_options(CLI::App* cmd, CliState& st,
                     std::map<std::string, CLI::Option*>& opts) {
  opts["gamma"] = cmd->add_option("--gamma", st.gamma, "discount factor");
  opts["gen_floor"] =
      cmd->add_option("--gen-floor", st.gen_floor, "generation share used at load buses");
  opts["bonus"] = cmd->add_option("--bonus", st.bonus,
                                  "reward added per newly identified target line");
  opts["env_max_steps"] =
      cmd->add_option("--env-max-steps", st.env_max_steps, "episode truncation length");
  opts["starts"] = cmd->add_option("--starts", st.starts, "number of start buses");
}

void add_train_options(CLI::App* cmd, CliState& st,
                       std::map<std::string, CLI::Option*>& opts) {
  opts["episodes"] = cmd->add_option("--episodes", st.episodes, "training episode cap");
  opts["ep_steps"] =
      cmd->add_option("--max-steps", st.ep_steps, "max environment steps per episode");
  opts["train_steps"] = cmd->add_option("--train-steps", st.train_steps,
                                        "gradient update budget");
  opts["hidden"] = cmd->add_option("--hidden", st.hidden, "hidden neurons per layer");
  opts["layers"] = cmd->add_option("--layers", st.layers, "hidden layer count");
  opts["alpha"] = cmd->add_option("--alpha", st.alpha, "learning rate");
  opts["batch"] = cmd->add_option("--batch", st.batch, "minibatch size");
  opts["sync"] = cmd->add_option("--sync", st.sync, "target refresh period (updates)");
  opts["replay"] = cmd->add_option("--replay", st.replay, "replay memory capacity");
  opts["eps_final"] =
      cmd->add_option("--eps-final", st.eps_final, "final exploration rate");
}

// flags given on the command line override the config file
void merge(CliState& st, std::map<std::string, CLI::Option*>& opts) {
  auto set = [&opts](const char* key) {
    auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  };
  RunConfig& c = st.cfg;
  if (set("case")) c.case_path = st.case_path;
  if (set("matrix")) c.import_matrix = st.matrix;
  if (set("rating_floor")) c.rating_floor_mw = st.rating_floor;
  if (set("wind")) c.wind_path = st.wind_path;
  if (set("scenario")) c.scenario = st.scenario;
  if (set("minute")) c.minute = st.minute;
  if (set("farms")) c.farm_buses = parse_int_list(st.farms);
  if (set("pair_rank")) c.pair_rank = st.pair_rank;
  if (set("gamma")) {
    c.gamma = st.gamma;
    c.train.gamma = st.gamma;
  }
  if (set("gen_floor")) c.gen_floor = st.gen_floor;
  if (set("bonus")) c.terminal_bonus = st.bonus;
  if (set("env_max_steps")) c.env_max_steps = st.env_max_steps;
  if (set("starts")) c.starts = st.starts;
  if (set("episodes")) c.train.max_episodes = st.episodes;
  if (set("ep_steps")) c.train.max_steps = st.ep_steps;
  if (set("train_steps")) c.train.total_train_steps = st.train_steps;
  if (set("hidden")) c.train.hidden_neurons = st.hidden;
  if (set("layers")) c.train.hidden_layers = st.layers;
  if (set("alpha")) c.train.alpha = st.alpha;
  if (set("batch")) c.train.batch_size = st.batch;
  if (set("sync")) c.train.sync_every = st.sync;
  if (set("replay")) c.train.replay_capacity = st.replay;
  if (set("eps_final")) c.train.epsilon_final = st.eps_final;
  if (set("methods")) c.methods = parse_str_list(st.methods);
  if (set("overrides")) c.overrides_path = st.overrides;
  if (set("seed")) {
    c.seed = st.seed;
    c.train.seed = st.seed;
  }
  if (set("out_dir")) c.out_dir = st.out_dir;
  if (set("scheme")) c.scheme = scheme_from_string(st.scheme);
  if (set("threads")) c.threads = st.threads;
}

// the explicit pair spec needs the network, so it resolves late
void resolve_pair(CliState& st, std::map<std::string, CLI::Option*>& opts,
                  const PowerNetwork& net) {
  auto it = opts.find("pair");
  if (it != opts.end() && it->second->count() > 0)
    st.cfg.pair = parse_pair_spec(st.pair_spec, net);
}

int run_contingency(CliState& st, std::map<std::string, CLI::Option*>& opts) {
  merge(st, opts);
  if (st.dry_run) {
    std::cout << config_to_json(st.cfg).dump(2) << "\n";
    return 0;
  }
  check_config(st.cfg);
  PowerNetwork net = apply_configured_wind(load_configured_case(st.cfg), st.cfg);
  BranchFlows flows = dc_power_flow(net);

  N2Result n2 = prune_n2(net, flows);
  auto n1 = enumerate_n1(net);
  auto n11 = enumerate_n11(net);

  ordered_json doc;
  doc["tool"] = "gridsec";
  doc["version"] = kVersion;
  doc["seed"] = st.cfg.seed;
  doc["case"] = {{"path", st.cfg.case_path},
                 {"bus_count", net.bus_count()},
                 {"branch_count", net.branch_count()}};
  doc["contingency"] = contingency_to_json(net, n2, n1, n11);

  if (st.oracle) {
    N2Result oracle = exhaustive_n2(net);
    auto key = [](const OutagePair& p) { return std::make_pair(p.x, p.y); };
    auto collect = [&key](const std::vector<OutagePair>& v) {
      std::vector<std::pair<int, int>> out;
      for (const auto& p : v) out.push_back(key(p));
      std::sort(out.begin(), out.end());
      return out;
    };
    bool match = collect(n2.violating) == collect(oracle.violating) &&
                 collect(n2.islanding) == collect(oracle.islanding);
    doc["oracle"] = {{"pairs_total", oracle.pairs_total},
                     {"violating_count", oracle.violating.size()},
                     {"islanding_count", oracle.islanding.size()},
                     {"matches_pruned_route", match}};
    if (!match) {
      std::ofstream f(st.out_file.empty() ? "contingency.json" : st.out_file);
      f << doc.dump(2) << "\n";
      throw ComputeError("pruned and exhaustive routes disagree");
    }
  }

  std::string out = st.out_file;
  if (out.empty()) {
    fs::create_directories(st.cfg.out_dir);
    out = (fs::path(st.cfg.out_dir) / "contingency.json").string();
  }
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write " + out);
  f << doc.dump(2) << "\n";

  std::cout << "branches: " << net.branch_count() << "\n"
            << "single outages flagged: " << n1.size() << "\n"
            << "follow-up outages flagged: " << n11.outages.size() << "\n"
            << "pair space: " << n2.pairs_total << " (pruned " << n2.pairs_pruned
            << " in " << n2.prune_iterations << " passes)\n"
            << "islanding pairs: " << n2.islanding.size() << "\n"
            << "overload pairs: " << n2.violating.size() << "\n"
            << "report: " << out << "\n";
  return 0;
}

int run_assess(CliState& st, std::map<std::string, CLI::Option*>& opts) {
  merge(st, opts);
  if (st.dry_run) {
    std::cout << config_to_json(st.cfg).dump(2) << "\n";
    return 0;
  }
  check_config(st.cfg);
  if (opts["pair"]->count() > 0) {
    PowerNetwork net = apply_configured_wind(load_configured_case(st.cfg), st.cfg);
    resolve_pair(st, opts, net);
  }
  AssessmentOutput out = run_assessment(st.cfg);
  write_assessment_outputs(out, st.cfg);

  std::cout << "target pair: " << out.report["target_pair"]["x"] << ","
            << out.report["target_pair"]["y"] << "\n";
  for (const auto& ms : out.methods)
    std::cout << ms.method << ": mean " << ms.mean << " transitions (min " << ms.min
              << ", max " << ms.max << ")\n";
  std::cout << "training: " << out.train_seconds << " s, total: " << out.total_seconds
            << " s\n"
            << "outputs in " << st.cfg.out_dir << "\n";
  return 0;
}

int run_baseline(CliState& st, std::map<std::string, CLI::Option*>& opts) {
  merge(st, opts);
  check_config(st.cfg);
  PowerNetwork net = apply_configured_wind(load_configured_case(st.cfg), st.cfg);
  resolve_pair(st, opts, net);

  BranchFlows flows = dc_power_flow(net);
  N2Result n2 = prune_n2(net, flows);
  auto [tx, ty] = select_target_pair(st.cfg, net, n2);

  auto scores = score_network(net, st.cfg.scheme);
  TransitionGraph graph = build_transition_graph(net, flows, scores, st.cfg.gen_floor);
  EnvConfig env_cfg;
  env_cfg.gamma = st.cfg.gamma;
  env_cfg.target_x = tx;
  env_cfg.target_y = ty;
  env_cfg.gen_floor = st.cfg.gen_floor;
  env_cfg.terminal_bonus = st.cfg.terminal_bonus;
  env_cfg.max_steps = st.cfg.env_max_steps;
  AttackEnv env(net, graph, env_cfg);

  auto starts = draw_start_buses(net, st.cfg.starts, st.cfg.seed);
  std::vector<WalkStats> walks;
  for (size_t i = 0; i < starts.size(); ++i) {
    WalkStats ws;
    if (st.method == "random") {
      BaselineWalk bw = random_walk(env, starts[i], st.cfg.seed * 1000003ULL + i);
      ws.start_bus = bw.start_bus;
      ws.transitions = bw.transitions;
      ws.truncated = bw.truncated;
      ws.walk = bw.walk;
    } else if (st.method == "dfs") {
      BaselineWalk bw = dfs_search(env, starts[i]);
      ws.start_bus = bw.start_bus;
      ws.transitions = bw.transitions;
      ws.truncated = bw.truncated;
      ws.walk = bw.walk;
    } else if (st.method == "dijkstra") {
      ws.start_bus = starts[i];
      ws.transitions = dijkstra_path(env, starts[i], st.weighted);
    } else {
      throw ConfigError("unknown baseline method '" + st.method + "'");
    }
    walks.push_back(std::move(ws));
  }
  MethodStats ms = summarize_method(st.method, std::move(walks));

  std::string out = st.out_file;
  if (out.empty()) {
    fs::create_directories(st.cfg.out_dir);
    out = (fs::path(st.cfg.out_dir) / "baseline.csv").string();
  }
  write_comparison_csv({ms}, out);
  std::cout << st.method << ": mean " << ms.mean << " transitions (min " << ms.min
            << ", max " << ms.max << ") over " << starts.size() << " starts\n"
            << "results: " << out << "\n";
  return 0;
}

int run_compare(CliState& st, std::map<std::string, CLI::Option*>& opts) {
  merge(st, opts);
  check_config(st.cfg);
  if (st.cfg.methods.size() < 2)
    throw ConfigError("comparison needs at least two methods");
  if (opts["pair"]->count() > 0) {
    PowerNetwork net = apply_configured_wind(load_configured_case(st.cfg), st.cfg);
    resolve_pair(st, opts, net);
  }
  auto methods = compare_methods(st.cfg, st.cfg.methods);

  std::string out = st.out_file;
  if (out.empty()) {
    fs::create_directories(st.cfg.out_dir);
    out = (fs::path(st.cfg.out_dir) / "comparison.csv").string();
  }
  write_comparison_csv(methods, out);
  for (const auto& ms : methods)
    std::cout << ms.method << ": mean " << ms.mean << " transitions (min " << ms.min
              << ", max " << ms.max << ")\n";
  std::cout << "table: " << out << "\n";
  return 0;
}

int run_import(CliState& st) {
  CaseOptions o;
  o.rating_floor_mw = st.rating_floor > 0.0 ? st.rating_floor : 10.0;
  PowerNetwork net = import_matrix_case(st.case_path, o);
  if (st.out_file.empty()) throw ConfigError("import needs --out <file>");
  write_case(net, st.out_file);
  std::cout << "imported " << net.bus_count() << " buses, " << net.branch_count()
            << " branches, " << net.generators.size() << " generators -> "
            << st.out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid cybersecurity assessment: contingencies, node scores, attack policy"};
  app.require_subcommand(1);

  CliState st;
  std::map<std::string, CLI::Option*> g;
  g["config"] = app.add_option("--config", st.config_path, "TOML or JSON run config")
                    ->expected(1);

  auto add_globals = [&st, &g](CLI::App* cmd, std::map<std::string, CLI::Option*>& opts) {
    opts["seed"] = cmd->add_option("--seed", st.seed, "rng seed");
    opts["out_dir"] = cmd->add_option("--out-dir", st.out_dir, "output directory");
    opts["scheme"] = cmd->add_option("--scheme", st.scheme, "scoring scheme: cvss|ivss");
    opts["threads"] = cmd->add_option("--threads", st.threads, "worker threads");
  };

  auto* c_cont = app.add_subcommand("contingency", "enumerate critical outages");
  std::map<std::string, CLI::Option*> o_cont;
  add_globals(c_cont, o_cont);
  add_case_options(c_cont, st, o_cont);
  c_cont->add_flag("--oracle", st.oracle, "also run the exhaustive re-solve route");
  c_cont->add_option("--out", st.out_file, "report path (default out-dir/contingency.json)");
  c_cont->add_flag("--dry-run", st.dry_run, "echo the validated config and stop");

  auto* c_assess = app.add_subcommand("assess", "full pipeline through policy training");
  std::map<std::string, CLI::Option*> o_assess;
  add_globals(c_assess, o_assess);
  add_case_options(c_assess, st, o_assess);
  add_pair_options(c_assess, st, o_assess);
  add_env_options(c_assess, st, o_assess);
  add_train_options(c_assess, st, o_assess);
  o_assess["methods"] =
      c_assess->add_option("--methods", st.methods, "comma list of comparison methods");
  o_assess["overrides"] =
      c_assess->add_option("--overrides", st.overrides, "per-bus vector override JSON");
  c_assess->add_flag("--dry-run", st.dry_run, "echo the validated config and stop");

  auto* c_base = app.add_subcommand("baseline", "run one comparison method");
  std::map<std::string, CLI::Option*> o_base;
  add_globals(c_base, o_base);
  add_case_options(c_base, st, o_base);
  add_pair_options(c_base, st, o_base);
  add_env_options(c_base, st, o_base);
  c_base->add_option("--method", st.method, "random|dfs|dijkstra")->required();
  c_base->add_flag("--weighted", st.weighted, "cost edges by -log(tp) for dijkstra");
  c_base->add_option("--out", st.out_file, "results CSV path");

  auto* c_cmp = app.add_subcommand("compare", "run several methods on shared starts");
  std::map<std::string, CLI::Option*> o_cmp;
  add_globals(c_cmp, o_cmp);
  add_case_options(c_cmp, st, o_cmp);
  add_pair_options(c_cmp, st, o_cmp);
  add_env_options(c_cmp, st, o_cmp);
  add_train_options(c_cmp, st, o_cmp);
  o_cmp["methods"] =
      c_cmp->add_option("--methods", st.methods, "comma list, at least two");
  c_cmp->add_option("--out", st.out_file, "comparison CSV path");

  auto* c_imp = app.add_subcommand("import", "convert a matrix-format case to the JSON schema");
  c_imp->add_option("--import-matrix-case", st.case_path, "matrix-format case file")
      ->required();
  c_imp->add_option("--out", st.out_file, "destination JSON path");
  c_imp->add_option("--rating-floor", st.rating_floor,
                    "floor MW for branches without ratings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    st.load_base();
    if (c_cont->parsed()) return run_contingency(st, o_cont);
    if (c_assess->parsed()) return run_assess(st, o_assess);
    if (c_base->parsed()) return run_baseline(st, o_base);
    if (c_cmp->parsed()) return run_compare(st, o_cmp);
    if (c_imp->parsed()) return run_import(st);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ComputeError& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
