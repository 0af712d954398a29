#include "gridsec/attack_env.hpp"

#include <algorithm>
#include <cmath>

namespace gridsec {

double transition_probability(const PowerNetwork& net, const BranchFlows& flows,
                              const std::vector<NodeScore>& scores, int from_bus_index,
                              int to_bus_index, int branch, double gen_floor) {
  (void)from_bus_index;
  const Bus& dest = net.buses[to_bus_index];
  double score = scores[to_bus_index].base;

  double gen_share;
  if (dest.kind == BusKind::PQ) {
    gen_share = gen_floor;
  } else {
    double total = net.total_generation_mw();
    const Generator* g = net.generator_at(dest.id);
    gen_share = (total > 0.0 && g) ? g->output_mw / total : 0.0;
  }

  const Branch& br = net.branches[branch];
  double utilization = std::abs(flows.mw[branch]) / br.rating_mw;

  return (score / 10.0) * gen_share * utilization;
}

TransitionGraph build_transition_graph(const PowerNetwork& net, const BranchFlows& flows,
                                       const std::vector<NodeScore>& scores,
                                       double gen_floor) {
  const int n = net.bus_count();
  TransitionGraph g;
  g.n_buses = n;
  g.adj.assign(n, {});
  g.loading.assign(n, 0.0);

  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& br = net.branches[b];
    double ratio = std::abs(flows.mw[b]) / br.rating_mw;
    g.loading[net.bus_index(br.from_bus)] += ratio;
    g.loading[net.bus_index(br.to_bus)] += ratio;
  }

  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& br = net.branches[b];
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    TransitionGraph::Edge fwd;
    fwd.to = t;
    fwd.branch = b;
    fwd.tp = transition_probability(net, flows, scores, f, t, b, gen_floor);
    fwd.dcp = g.loading[t] - g.loading[f];
    g.adj[f].push_back(fwd);

    TransitionGraph::Edge rev;
    rev.to = f;
    rev.branch = b;
    rev.tp = transition_probability(net, flows, scores, t, f, b, gen_floor);
    rev.dcp = g.loading[f] - g.loading[t];
    g.adj[t].push_back(rev);
  }

  for (auto& edges : g.adj)
    std::sort(edges.begin(), edges.end(),
              [](const TransitionGraph::Edge& a, const TransitionGraph::Edge& b) {
                if (a.to != b.to) return a.to < b.to;
                return a.branch < b.branch;
              });
  return g;
}

AttackEnv::AttackEnv(const PowerNetwork& net, const TransitionGraph& graph, EnvConfig cfg)
    : net_(&net), graph_(&graph), cfg_(cfg) {
  if (cfg_.gamma < 0.0 || cfg_.gamma > 1.0)
    throw ConfigError("gamma must lie in [0,1]");
  if (cfg_.max_steps <= 0) throw ConfigError("max_steps must be positive");

  const Branch* bx = nullptr;
  const Branch* by = nullptr;
  for (const auto& br : net.branches) {
    if (br.id == cfg_.target_x) bx = &br;
    if (br.id == cfg_.target_y) by = &br;
  }
  if (!bx || !by || cfg_.target_x == cfg_.target_y)
    throw ConfigError("target pair must name two distinct branches of the network");

  const int n = net.bus_count();
  x_end_.assign(n, 0);
  y_end_.assign(n, 0);
  x_end_[net.bus_index(bx->from_bus)] = 1;
  x_end_[net.bus_index(bx->to_bus)] = 1;
  y_end_[net.bus_index(by->from_bus)] = 1;
  y_end_[net.bus_index(by->to_bus)] = 1;

  si_.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (const auto& e : graph.adj[i])
      best = std::max(best, cfg_.gamma * e.tp * e.dcp);
    si_[i] = best;
  }
}

AttackState AttackEnv::reset(int start_bus_id) const {
  int idx = net_->bus_index(start_bus_id);
  AttackState s;
  s.current_bus = start_bus_id;
  s.found_x = x_end_[idx];
  s.found_y = y_end_[idx];
  s.step_count = 0;
  return s;
}

Observation AttackEnv::observe(const AttackState& state) const {
  int idx = net_->bus_index(state.current_bus);
  Observation obs;
  obs.at_x_endpoint = x_end_[idx];
  obs.at_y_endpoint = y_end_[idx];
  for (const auto& e : graph_->adj[idx]) {
    int id = net_->buses[e.to].id;
    if (obs.actions.empty() || obs.actions.back() != id) obs.actions.push_back(id);
  }
  return obs;
}

double AttackEnv::security_index(const AttackState& state) const {
  return si_[net_->bus_index(state.current_bus)];
}

const TransitionGraph::Edge& AttackEnv::edge_for(int from_index, int to_index) const {
  const TransitionGraph::Edge* best = nullptr;
  for (const auto& e : graph_->adj[from_index]) {
    if (e.to != to_index) continue;
    if (!best || e.tp > best->tp) best = &e;
  }
  if (!best)
    throw ComputeError("bus " + std::to_string(net_->buses[to_index].id) +
                       " is not reachable from bus " +
                       std::to_string(net_->buses[from_index].id));
  return *best;
}

double AttackEnv::reward(const AttackState& state, int action_bus_id) const {
  int from = net_->bus_index(state.current_bus);
  int to = net_->bus_index(action_bus_id);
  const auto& e = edge_for(from, to);
  double r = e.tp * (e.dcp + si_[to]);
  if (!state.found_x && x_end_[to]) r += cfg_.terminal_bonus;
  if (!state.found_y && y_end_[to]) r += cfg_.terminal_bonus;
  return r;
}

StepResult AttackEnv::step(const AttackState& state, int action_bus_id) const {
  StepResult out;
  out.reward = reward(state, action_bus_id);

  int to = net_->bus_index(action_bus_id);
  out.state = state;
  out.state.current_bus = action_bus_id;
  out.state.found_x = state.found_x || x_end_[to];
  out.state.found_y = state.found_y || y_end_[to];
  out.state.step_count = state.step_count + 1;

  out.truncated = !terminal(out.state) && out.state.step_count >= cfg_.max_steps;
  out.done = terminal(out.state) || out.truncated;
  out.obs = observe(out.state);
  return out;
}

std::vector<double> AttackEnv::encode(const AttackState& state) const {
  std::vector<double> x(state_size(), 0.0);
  x[net_->bus_index(state.current_bus)] = 1.0;
  x[bus_count()] = state.found_x ? 1.0 : 0.0;
  x[bus_count() + 1] = state.found_y ? 1.0 : 0.0;
  return x;
}

}  // namespace gridsec
