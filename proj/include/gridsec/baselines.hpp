#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsec/attack_env.hpp"

namespace gridsec {

struct BaselineWalk {
  int start_bus = 0;
  int transitions = 0;
  bool truncated = false;
  std::vector<int> walk;  // bus ids, starting bus first
};

// uniform neighbor choice until both target lines are identified;
// capped at 50 transitions per bus
BaselineWalk random_walk(const AttackEnv& env, int start_bus, std::uint64_t seed);

// depth-first traversal walk with backtrack moves counted, neighbors in
// ascending bus id order; assumes the full graph is known
BaselineWalk dfs_search(const AttackEnv& env, int start_bus);

// fewest transitions over both target-visit orders with unit edge weights;
// set weighted to cost edges by -log(tp) instead (hop count still reported)
int dijkstra_path(const AttackEnv& env, int start_bus, bool weighted = false);

}  // namespace gridsec
