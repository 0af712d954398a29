#pragma once

#include <vector>

#include "gridsec/contingency.hpp"
#include "gridsec/cvss.hpp"
#include "gridsec/dcflow.hpp"
#include "gridsec/network.hpp"

namespace gridsec {

struct TransitionGraph {
  struct Edge {
    int to = 0;      // destination bus index
    int branch = 0;  // branch position in the network
    double tp = 0.0;
    double dcp = 0.0;  // incident-loading difference toward `to`
  };
  int n_buses = 0;
  std::vector<std::vector<Edge>> adj;  // per bus index, sorted by (to, branch)
  std::vector<double> loading;         // sum of |flow|/rating over incident branches
};

// per-edge severity weight: destination score/10 times generation share times
// branch utilization
double transition_probability(const PowerNetwork& net, const BranchFlows& flows,
                              const std::vector<NodeScore>& scores, int from_bus_index,
                              int to_bus_index, int branch, double gen_floor);

TransitionGraph build_transition_graph(const PowerNetwork& net, const BranchFlows& flows,
                                       const std::vector<NodeScore>& scores,
                                       double gen_floor);

struct EnvConfig {
  double gamma = 0.9;
  int target_x = -1;  // branch ids of the contingency pair under study
  int target_y = -1;
  double gen_floor = 0.05;
  double terminal_bonus = 10.0;
  int max_steps = 1000;
};

struct AttackState {
  int current_bus = 0;  // bus id
  bool found_x = false;
  bool found_y = false;
  int step_count = 0;
};

struct Observation {
  std::vector<int> actions;  // neighbor bus ids, ascending
  bool at_x_endpoint = false;
  bool at_y_endpoint = false;
};

struct StepResult {
  AttackState state;
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
};

class AttackEnv {
 public:
  AttackEnv(const PowerNetwork& net, const TransitionGraph& graph, EnvConfig cfg);

  AttackState reset(int start_bus_id) const;
  Observation observe(const AttackState& state) const;

  // one-step lookahead value of the best outgoing edge
  double security_index(const AttackState& state) const;
  double reward(const AttackState& state, int action_bus_id) const;
  StepResult step(const AttackState& state, int action_bus_id) const;

  bool terminal(const AttackState& state) const { return state.found_x && state.found_y; }

  int bus_count() const { return net_->bus_count(); }
  int state_size() const { return net_->bus_count() + 2; }
  std::vector<double> encode(const AttackState& state) const;

  const EnvConfig& config() const { return cfg_; }
  const PowerNetwork& network() const { return *net_; }
  const TransitionGraph& graph() const { return *graph_; }

  bool x_endpoint(int bus_index) const { return x_end_[bus_index]; }
  bool y_endpoint(int bus_index) const { return y_end_[bus_index]; }

 private:
  const TransitionGraph::Edge& edge_for(int from_index, int to_index) const;

  const PowerNetwork* net_;
  const TransitionGraph* graph_;
  EnvConfig cfg_;
  std::vector<char> x_end_;
  std::vector<char> y_end_;
  std::vector<double> si_;  // security index per bus index
};

}  // namespace gridsec
