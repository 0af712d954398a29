#include "gridsec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "gridsec/rng.hpp"

namespace gridsec {

BaselineWalk random_walk(const AttackEnv& env, int start_bus, std::uint64_t seed) {
  Rng rng(seed);
  const long long cap = 50LL * env.bus_count();
  BaselineWalk out;
  out.start_bus = start_bus;
  out.walk.push_back(start_bus);

  AttackState state = env.reset(start_bus);
  while (!env.terminal(state)) {
    if (state.step_count >= cap) {
      out.truncated = true;
      break;
    }
    Observation obs = env.observe(state);
    if (obs.actions.empty()) {
      out.truncated = true;
      break;
    }
    int pick = obs.actions[rng.uniform_int(static_cast<int>(obs.actions.size()))];
    state = env.step(state, pick).state;
    out.walk.push_back(state.current_bus);
  }
  out.transitions = state.step_count;
  return out;
}

namespace {

struct DfsTracker {
  const AttackEnv* env;
  const std::vector<std::vector<int>>* adj;
  std::vector<char> visited;
  AttackState state;
  BaselineWalk* out;

  bool move(int bus_index) {
    state = env->step(state, env->network().buses[bus_index].id).state;
    out->walk.push_back(state.current_bus);
    ++out->transitions;
    return env->terminal(state);
  }

  bool explore(int u) {
    visited[u] = 1;
    for (int v : (*adj)[u]) {
      if (visited[v]) continue;
      if (move(v)) return true;
      if (explore(v)) return true;
      if (move(u)) return true;  // backtrack
    }
    return false;
  }
};

}  // namespace

BaselineWalk dfs_search(const AttackEnv& env, int start_bus) {
  BaselineWalk out;
  out.start_bus = start_bus;
  out.walk.push_back(start_bus);

  auto adj = env.network().adjacency();
  DfsTracker t{&env, &adj, std::vector<char>(env.bus_count(), 0), env.reset(start_bus),
               &out};
  if (!env.terminal(t.state) && !t.explore(env.network().bus_index(start_bus)) &&
      !env.terminal(t.state))
    throw ComputeError("search exhausted the graph without identifying both lines");
  return out;
}

namespace {

struct ReachInfo {
  std::vector<double> cost;
  std::vector<int> hops;
};

ReachInfo shortest_from(const AttackEnv& env, int source_index, bool weighted) {
  const int n = env.bus_count();
  ReachInfo info;
  info.cost.assign(n, std::numeric_limits<double>::infinity());
  info.hops.assign(n, -1);
  info.cost[source_index] = 0.0;
  info.hops[source_index] = 0;

  using Item = std::tuple<double, int, int>;  // cost, hops, node
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.emplace(0.0, 0, source_index);
  std::vector<char> done(n, 0);

  while (!heap.empty()) {
    auto [cost, hops, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const auto& e : env.graph().adj[u]) {
      double w = 1.0;
      if (weighted) {
        if (e.tp <= 0.0) continue;
        w = std::max(0.0, -std::log(e.tp));
      }
      double nc = cost + w;
      if (nc < info.cost[e.to] ||
          (nc == info.cost[e.to] && hops + 1 < info.hops[e.to])) {
        info.cost[e.to] = nc;
        info.hops[e.to] = hops + 1;
        heap.emplace(nc, hops + 1, e.to);
      }
    }
  }
  return info;
}

std::pair<int, int> branch_endpoints(const AttackEnv& env, int branch_id) {
  for (const auto& br : env.network().branches)
    if (br.id == branch_id)
      return {env.network().bus_index(br.from_bus), env.network().bus_index(br.to_bus)};
  throw ConfigError("branch " + std::to_string(branch_id) + " not in network");
}

}  // namespace

int dijkstra_path(const AttackEnv& env, int start_bus, bool weighted) {
  const int start = env.network().bus_index(start_bus);
  auto [x1, x2] = branch_endpoints(env, env.config().target_x);
  auto [y1, y2] = branch_endpoints(env, env.config().target_y);

  ReachInfo from_start = shortest_from(env, start, weighted);

  double best_cost = std::numeric_limits<double>::infinity();
  int best_hops = -1;
  auto consider = [&](const std::array<int, 2>& first, const std::array<int, 2>& second) {
    for (int t1 : first) {
      if (!std::isfinite(from_start.cost[t1])) continue;
      ReachInfo from_t1 = shortest_from(env, t1, weighted);
      for (int t2 : second) {
        if (!std::isfinite(from_t1.cost[t2])) continue;
        double total = from_start.cost[t1] + from_t1.cost[t2];
        int hops = from_start.hops[t1] + from_t1.hops[t2];
        if (total < best_cost || (total == best_cost && hops < best_hops)) {
          best_cost = total;
          best_hops = hops;
        }
      }
    }
  };
  consider({x1, x2}, {y1, y2});
  consider({y1, y2}, {x1, x2});

  if (best_hops < 0) throw ComputeError("target lines are unreachable from the start bus");
  return best_hops;
}

}  // namespace gridsec
