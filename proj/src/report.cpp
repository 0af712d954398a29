#include "gridsec/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>

#include "gridsec/baselines.hpp"
#include "gridsec/rng.hpp"
#include "gridsec/wind.hpp"

namespace gridsec {

using nlohmann::ordered_json;

namespace {

// keeps the error type so the CLI can still map it to an exit code
template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(stage) + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(std::string(stage) + ": " + e.what());
  } catch (const ComputeError& e) {
    throw ComputeError(std::string(stage) + ": " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  auto dt = std::chrono::steady_clock::now() - t0;
  double s = std::chrono::duration<double>(dt).count();
  return std::round(s * 10.0) / 10.0;
}

ordered_json violations_to_json(const std::vector<Violation>& vs) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : vs)
    arr.push_back({{"branch", v.branch},
                   {"post_flow_mw", v.post_flow_mw},
                   {"rating_mw", v.rating_mw}});
  return arr;
}

ordered_json walk_to_json(const WalkStats& ws) {
  ordered_json j;
  j["start"] = ws.start_bus;
  j["transitions"] = ws.transitions;
  j["truncated"] = ws.truncated;
  j["pv_visited"] = ws.pv_visited;
  j["pq_visited"] = ws.pq_visited;
  j["walk"] = ws.walk;
  return j;
}

WalkStats walk_from_baseline(const AttackEnv& env, const BaselineWalk& bw) {
  WalkStats ws;
  ws.start_bus = bw.start_bus;
  ws.transitions = bw.transitions;
  ws.truncated = bw.truncated;
  ws.walk = bw.walk;
  std::vector<char> visited(env.bus_count(), 0);
  for (int bus : bw.walk) visited[env.network().bus_index(bus)] = 1;
  for (int i = 0; i < env.bus_count(); ++i) {
    if (!visited[i]) continue;
    if (env.network().buses[i].kind == BusKind::PQ)
      ++ws.pq_visited;
    else
      ++ws.pv_visited;
  }
  return ws;
}

}  // namespace

MethodStats summarize_method(const std::string& name, std::vector<WalkStats> walks) {
  MethodStats ms;
  ms.method = name;
  ms.per_start = std::move(walks);
  if (ms.per_start.empty()) return ms;
  long long total = 0;
  ms.min = ms.per_start.front().transitions;
  ms.max = ms.per_start.front().transitions;
  for (const auto& w : ms.per_start) {
    total += w.transitions;
    ms.min = std::min(ms.min, w.transitions);
    ms.max = std::max(ms.max, w.transitions);
  }
  ms.mean = static_cast<double>(total) / ms.per_start.size();
  return ms;
}

PowerNetwork load_configured_case(const RunConfig& cfg) {
  CaseOptions opts;
  opts.rating_floor_mw = cfg.rating_floor_mw;
  if (cfg.import_matrix) return import_matrix_case(cfg.case_path, opts);
  return parse_case(cfg.case_path, opts);
}

PowerNetwork apply_configured_wind(const PowerNetwork& net, const RunConfig& cfg) {
  if (cfg.wind_path.empty()) return net;
  WindSeries series = load_wind_csv(cfg.wind_path);
  WindScenario sc;
  sc.farm_buses = cfg.farm_buses;
  sc.active_farms = scenario_farms(cfg.scenario, series.farm_count());
  sc.minute = cfg.minute;
  return apply_injection(net, series, sc);
}

std::pair<int, int> select_target_pair(const RunConfig& cfg, const PowerNetwork& net,
                                       const N2Result& n2) {
  if (cfg.pair) {
    auto exists = [&net](int id) {
      for (const auto& br : net.branches)
        if (br.id == id) return true;
      return false;
    };
    if (!exists(cfg.pair->first) || !exists(cfg.pair->second))
      throw ConfigError("configured pair names branches not in the network");
    return *cfg.pair;
  }
  std::vector<OutagePair> ranked = rank_severity(n2);
  std::vector<const OutagePair*> overloads;
  for (const auto& p : ranked)
    if (!p.islanding) overloads.push_back(&p);
  if (overloads.empty())
    throw ConfigError("network has no overload-critical branch pairs to target");
  if (cfg.pair_rank > static_cast<int>(overloads.size()))
    throw ConfigError("pair_rank " + std::to_string(cfg.pair_rank) + " exceeds the " +
                      std::to_string(overloads.size()) + " overload pairs found");
  const OutagePair* p = overloads[cfg.pair_rank - 1];
  return {p->x, p->y};
}

std::vector<int> draw_start_buses(const PowerNetwork& net, int count,
                                  std::uint64_t seed) {
  if (count > net.bus_count())
    throw ConfigError("more start buses requested than buses in the network");
  Rng rng(seed);
  std::vector<int> ids;
  ids.reserve(net.buses.size());
  for (const auto& b : net.buses) ids.push_back(b.id);
  for (int i = 0; i < count; ++i) {
    int j = i + rng.uniform_int(static_cast<int>(ids.size()) - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  return ids;
}

ordered_json contingency_to_json(const PowerNetwork& net, const N2Result& n2,
                                 const std::vector<SingleOutage>& n1,
                                 const N11Result& n11) {
  ordered_json j;
  ordered_json jn1 = ordered_json::array();
  for (const auto& so : n1) {
    jn1.push_back({{"branch", so.branch},
                   {"islanding", so.islanding},
                   {"severity", so.severity},
                   {"violations", violations_to_json(so.violations)}});
  }
  j["n1"] = {{"count", n1.size()}, {"outages", jn1}};

  ordered_json jn11 = ordered_json::array();
  for (const auto& so : n11.outages) {
    jn11.push_back({{"branch", so.branch},
                    {"islanding", so.islanding},
                    {"severity", so.severity},
                    {"violations", violations_to_json(so.violations)}});
  }
  j["n11"] = {{"removed_branch",
               n11.removed_branch ? ordered_json(*n11.removed_branch) : ordered_json()},
              {"count", n11.outages.size()},
              {"outages", jn11}};

  ordered_json ranked = ordered_json::array();
  for (const auto& p : rank_severity(n2)) {
    ranked.push_back({{"x", p.x},
                      {"y", p.y},
                      {"islanding", p.islanding},
                      {"severity", p.severity},
                      {"violations", violations_to_json(p.violations)}});
  }
  j["n2"] = {{"pairs_total", n2.pairs_total},
             {"pairs_pruned", n2.pairs_pruned},
             {"prune_iterations", n2.prune_iterations},
             {"islanding_count", n2.islanding.size()},
             {"violating_count", n2.violating.size()},
             {"ranked", ranked}};

  ordered_json assumed = ordered_json::array();
  for (const auto& br : net.branches)
    if (br.rating_assumed) assumed.push_back(br.id);
  j["assumed_ratings"] = assumed;
  return j;
}

AssessmentOutput run_assessment(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  check_config(cfg);

  AssessmentOutput out;
  PowerNetwork base = run_stage("case", [&] { return load_configured_case(cfg); });
  PowerNetwork net = run_stage("wind", [&] { return apply_configured_wind(base, cfg); });
  BranchFlows flows = run_stage("powerflow", [&] { return dc_power_flow(net); });

  N2Result n2;
  std::vector<SingleOutage> n1;
  N11Result n11;
  run_stage("contingency", [&] {
    n2 = prune_n2(net, flows);
    n1 = enumerate_n1(net);
    n11 = enumerate_n11(net);
    return 0;
  });

  auto [tx, ty] = run_stage("target", [&] { return select_target_pair(cfg, net, n2); });

  std::map<int, CvssVector> overrides;
  if (!cfg.overrides_path.empty())
    overrides = run_stage("profiles", [&] { return load_vector_overrides(cfg.overrides_path); });

  auto scores = run_stage("scoring",
                          [&] { return score_network(net, cfg.scheme, overrides); });
  TransitionGraph graph = run_stage("graph", [&] {
    return build_transition_graph(net, flows, scores, cfg.gen_floor);
  });

  EnvConfig env_cfg;
  env_cfg.gamma = cfg.gamma;
  env_cfg.target_x = tx;
  env_cfg.target_y = ty;
  env_cfg.gen_floor = cfg.gen_floor;
  env_cfg.terminal_bonus = cfg.terminal_bonus;
  env_cfg.max_steps = cfg.env_max_steps;
  AttackEnv env(net, graph, env_cfg);

  out.starts = draw_start_buses(net, cfg.starts, cfg.seed);

  auto t_train = std::chrono::steady_clock::now();
  TrainConfig tc = cfg.train;
  TrainResult tr = run_stage("training", [&] { return train(env, tc); });
  out.train_seconds = seconds_since(t_train);
  out.curves = tr.curves;
  out.policy = tr.policy;

  // a second policy under the other scoring scheme, when the comparison asks
  const std::string main_dqn =
      cfg.scheme == ScoringScheme::Cvss31 ? "dqn-cvss" : "dqn-ivss";
  const std::string other_dqn =
      cfg.scheme == ScoringScheme::Cvss31 ? "dqn-ivss" : "dqn-cvss";
  const ScoringScheme other_scheme =
      cfg.scheme == ScoringScheme::Cvss31 ? ScoringScheme::Ivss : ScoringScheme::Cvss31;
  bool wants_other =
      std::find(cfg.methods.begin(), cfg.methods.end(), other_dqn) != cfg.methods.end();
  Policy other_policy;
  std::vector<NodeScore> other_scores;
  TransitionGraph other_graph;
  std::unique_ptr<AttackEnv> other_env;
  if (wants_other) {
    run_stage("training", [&] {
      other_scores = score_network(net, other_scheme, overrides);
      other_graph = build_transition_graph(net, flows, other_scores, cfg.gen_floor);
      other_env = std::make_unique<AttackEnv>(net, other_graph, env_cfg);
      other_policy = train(*other_env, tc).policy;
      return 0;
    });
  }

  run_stage("comparison", [&] {
    for (const auto& method : cfg.methods) {
      std::vector<WalkStats> walks;
      if (method == main_dqn) {
        walks = evaluate(tr.policy, env, out.starts).per_start;
      } else if (method == other_dqn && wants_other) {
        walks = evaluate(other_policy, *other_env, out.starts).per_start;
      } else if (method == "random") {
        for (size_t i = 0; i < out.starts.size(); ++i)
          walks.push_back(walk_from_baseline(
              env, random_walk(env, out.starts[i], cfg.seed * 1000003ULL + i)));
      } else if (method == "dfs") {
        for (int s : out.starts)
          walks.push_back(walk_from_baseline(env, dfs_search(env, s)));
      } else if (method == "dijkstra") {
        for (int s : out.starts) {
          WalkStats ws;
          ws.start_bus = s;
          ws.transitions = dijkstra_path(env, s);
          walks.push_back(ws);
        }
      }
      out.methods.push_back(summarize_method(method, std::move(walks)));
    }
    return 0;
  });

  run_stage("trace", [&] {
    AttackState st = env.reset(out.starts.front());
    int step = 0;
    while (!env.terminal(st) && step < cfg.env_max_steps) {
      Observation obs = env.observe(st);
      if (obs.actions.empty()) break;
      std::vector<int> valid;
      for (int bus_id : obs.actions) valid.push_back(net.bus_index(bus_id));
      int action = tr.policy.greedy_action(env.encode(st), valid);
      int action_bus = net.buses[action].id;
      StepResult sr = env.step(st, action_bus);
      ++step;
      out.trace.push_back({{"step", step},
                           {"bus", st.current_bus},
                           {"action", action_bus},
                           {"reward", sr.reward},
                           {"found_x", sr.state.found_x},
                           {"found_y", sr.state.found_y}});
      st = sr.state;
    }
    return 0;
  });

  ordered_json& r = out.report;
  r["tool"] = "gridsec";
  r["version"] = kVersion;
  r["seed"] = cfg.seed;
  r["config"] = config_to_json(cfg);
  r["case"] = {{"path", cfg.case_path},
               {"bus_count", net.bus_count()},
               {"branch_count", net.branch_count()},
               {"generator_count", net.generators.size()},
               {"total_load_mw", net.total_load_mw()}};
  r["contingency"] = contingency_to_json(net, n2, n1, n11);
  double pair_severity = 0.0;
  for (const auto& p : n2.violating)
    if (p.x == tx && p.y == ty) pair_severity = p.severity;
  r["target_pair"] = {{"x", tx}, {"y", ty}, {"severity", pair_severity}};

  ordered_json jscores = ordered_json::array();
  for (size_t i = 0; i < scores.size(); ++i) {
    const auto& ns = scores[i];
    jscores.push_back({{"bus", ns.bus},
                       {"kind", to_string(net.buses[i].kind)},
                       {"vector", to_string(ns.vec)},
                       {"exploitability", ns.exploit},
                       {"impact", ns.imp},
                       {"base", ns.base},
                       {"overridden", ns.overridden}});
  }
  r["scores"] = jscores;

  ordered_json jedges = ordered_json::array();
  for (int u = 0; u < graph.n_buses; ++u)
    for (const auto& e : graph.adj[u])
      jedges.push_back({{"from", net.buses[u].id},
                        {"to", net.buses[e.to].id},
                        {"branch", net.branches[e.branch].id},
                        {"tp", e.tp},
                        {"dcp", e.dcp}});
  r["transition_graph"] = {{"edge_count", jedges.size()}, {"edges", jedges}};

  r["training"] = {{"episodes", tr.episodes},
                   {"env_steps", tr.env_steps},
                   {"updates", tr.updates},
                   {"curve_points", tr.curves.size()}};

  ordered_json jmethods = ordered_json::array();
  for (const auto& ms : out.methods) {
    ordered_json jm;
    jm["method"] = ms.method;
    jm["mean_transitions"] = ms.mean;
    jm["min_transitions"] = ms.min;
    jm["max_transitions"] = ms.max;
    ordered_json per = ordered_json::array();
    for (const auto& w : ms.per_start) per.push_back(walk_to_json(w));
    jm["per_start"] = per;
    jmethods.push_back(jm);
  }
  r["methods"] = jmethods;

  out.total_seconds = seconds_since(t0);
  r["timing"] = {{"train_seconds", out.train_seconds},
                 {"total_seconds", out.total_seconds}};
  return out;
}

void write_assessment_outputs(const AssessmentOutput& out, const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto path = [&cfg](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };

  {
    std::ofstream f(path("report.json"));
    if (!f) throw ConfigError("cannot write report.json in " + cfg.out_dir);
    f << out.report.dump(2) << "\n";
  }
  write_curves_csv(out.curves, path("curves.csv"));
  write_comparison_csv(out.methods, path("comparison.csv"));
  out.policy.save(path("policy.json"));

  std::ofstream trace(path("trace.jsonl"));
  if (!trace) throw ConfigError("cannot write trace.jsonl in " + cfg.out_dir);
  for (const auto& rec : out.trace) trace << rec.dump() << "\n";
}

std::vector<MethodStats> compare_methods(const RunConfig& cfg,
                                         const std::vector<std::string>& methods) {
  if (methods.size() < 2)
    throw ConfigError("comparison needs at least two methods");
  RunConfig c = cfg;
  c.methods = methods;
  return run_assessment(c).methods;
}

void write_comparison_csv(const std::vector<MethodStats>& methods,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write comparison file " + path);
  out << "method,start_bus,transitions,truncated,mean,min,max\n";
  for (const auto& ms : methods)
    for (const auto& w : ms.per_start)
      out << ms.method << "," << w.start_bus << "," << w.transitions << ","
          << (w.truncated ? 1 : 0) << "," << ms.mean << "," << ms.min << "," << ms.max
          << "\n";
}

}  // namespace gridsec
