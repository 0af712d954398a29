#pragma once

#include <cstdint>
#include <vector>

#include "gridsec/attack_env.hpp"
#include "gridsec/mlp.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

struct TrainConfig {
  double alpha = 0.005;
  double gamma = 0.9;
  int hidden_neurons = 1000;
  int hidden_layers = 2;
  int max_steps = 1000;     // per episode
  int max_episodes = 100;
  int replay_capacity = 1000;
  double epsilon_final = 0.01;
  int batch_size = 32;
  int sync_every = 100;
  // gradient updates to run; the exploration rate decays linearly to
  // epsilon_final over the first half, then stays constant
  int total_train_steps = 2000;
  std::uint64_t seed = 0;
};

double tabular_q_update(double q_old, double reward, double max_next_q, double alpha,
                        double gamma);

// y = R + gamma * max(next_q), cut to R on terminal transitions;
// next_q holds the valid-action Q-values only
double td_target(double reward, const std::vector<double>& next_q, bool done,
                 double gamma);

// epsilon-greedy over the valid action subset; ties go to the lowest index
int select_action(const Mlp& qnet, const std::vector<double>& encoding,
                  const std::vector<int>& valid_actions, double epsilon, Rng& rng);

struct Transition {
  std::vector<double> s;
  int action = 0;  // output index (bus index)
  double reward = 0.0;
  std::vector<double> s2;
  std::vector<int> valid2;  // valid output indices at s2
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  void push(Transition t);
  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return data_[i]; }
  std::vector<const Transition*> sample(size_t n, Rng& rng) const;

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> data_;
};

double batch_loss(const std::vector<const Transition*>& batch, const Mlp& qnet,
                  const Mlp& target, double gamma);

struct Policy {
  Mlp net;
  double gamma = 0.9;
  int target_x = -1;
  int target_y = -1;

  int greedy_action(const std::vector<double>& encoding,
                    const std::vector<int>& valid_actions) const;

  nlohmann::ordered_json to_json() const;
  static Policy from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Policy load(const std::string& path);
};

struct CurvePoint {
  int step = 0;  // global environment step, 1-based
  double reward = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  Policy policy;
  std::vector<CurvePoint> curves;
  int episodes = 0;
  int env_steps = 0;
  int updates = 0;
};

TrainResult train(const AttackEnv& env, const TrainConfig& cfg);

struct WalkStats {
  int start_bus = 0;
  int transitions = 0;
  bool truncated = false;
  int pv_visited = 0;  // distinct generator-kind buses on the walk
  int pq_visited = 0;
  std::vector<int> walk;  // bus ids, starting bus first
};

struct EvalResult {
  std::vector<WalkStats> per_start;
  double mean_transitions = 0.0;
  int min_transitions = 0;
  int max_transitions = 0;
  double mean_pv = 0.0;
  double mean_pq = 0.0;
};

EvalResult evaluate(const Policy& policy, const AttackEnv& env,
                    const std::vector<int>& start_buses);

void write_curves_csv(const std::vector<CurvePoint>& curves, const std::string& path);

}  // namespace gridsec
