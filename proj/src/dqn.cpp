#include "gridsec/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gridsec {

double tabular_q_update(double q_old, double reward, double max_next_q, double alpha,
                        double gamma) {
  return q_old + alpha * (reward + gamma * max_next_q - q_old);
}

double td_target(double reward, const std::vector<double>& next_q, bool done,
                 double gamma) {
  if (done || next_q.empty()) return reward;
  return reward + gamma * *std::max_element(next_q.begin(), next_q.end());
}

int select_action(const Mlp& qnet, const std::vector<double>& encoding,
                  const std::vector<int>& valid_actions, double epsilon, Rng& rng) {
  if (valid_actions.empty()) throw ComputeError("no valid actions to select from");
  if (rng.uniform01() < epsilon)
    return valid_actions[rng.uniform_int(static_cast<int>(valid_actions.size()))];

  Eigen::VectorXd enc =
      Eigen::Map<const Eigen::VectorXd>(encoding.data(), encoding.size());
  Eigen::VectorXd q = qnet.forward(enc);
  int best = valid_actions.front();
  for (int a : valid_actions)
    if (q(a) > q(best) || (q(a) == q(best) && a < best)) best = a;
  return best;
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  data_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(size_t n, Rng& rng) const {
  if (data_.empty()) throw ComputeError("cannot sample from an empty replay buffer");
  std::vector<const Transition*> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i)
    out.push_back(&data_[static_cast<size_t>(rng.uniform_int(static_cast<int>(data_.size())))]);
  return out;
}

namespace {

// forward both nets over a batch and return per-sample prediction and target
struct BatchEval {
  Eigen::MatrixXd x;       // inputs, sample per column
  Eigen::MatrixXd q;       // online net outputs
  std::vector<double> y;   // td targets
};

BatchEval eval_batch(const std::vector<const Transition*>& batch, const Mlp& qnet,
                     const Mlp& target, double gamma, Mlp::Cache* cache) {
  const int in = qnet.input_size();
  const int n = static_cast<int>(batch.size());
  BatchEval ev;
  ev.x.resize(in, n);
  Eigen::MatrixXd x2(in, n);
  for (int i = 0; i < n; ++i) {
    ev.x.col(i) = Eigen::Map<const Eigen::VectorXd>(batch[i]->s.data(), in);
    x2.col(i) = Eigen::Map<const Eigen::VectorXd>(batch[i]->s2.data(), in);
  }
  ev.q = cache ? qnet.forward_cached(ev.x, *cache) : qnet.forward(ev.x);
  Eigen::MatrixXd q2 = target.forward(x2);
  ev.y.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> next_q;
    next_q.reserve(batch[i]->valid2.size());
    for (int a : batch[i]->valid2) next_q.push_back(q2(a, i));
    ev.y[i] = td_target(batch[i]->reward, next_q, batch[i]->done, gamma);
  }
  return ev;
}

}  // namespace

double batch_loss(const std::vector<const Transition*>& batch, const Mlp& qnet,
                  const Mlp& target, double gamma) {
  if (batch.empty()) throw ComputeError("loss needs a nonempty batch");
  BatchEval ev = eval_batch(batch, qnet, target, gamma, nullptr);
  double sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    double diff = ev.q(batch[i]->action, static_cast<int>(i)) - ev.y[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(batch.size());
}

int Policy::greedy_action(const std::vector<double>& encoding,
                          const std::vector<int>& valid_actions) const {
  if (valid_actions.empty()) throw ComputeError("no valid actions to select from");
  Eigen::VectorXd enc =
      Eigen::Map<const Eigen::VectorXd>(encoding.data(), encoding.size());
  Eigen::VectorXd q = net.forward(enc);
  int best = valid_actions.front();
  for (int a : valid_actions)
    if (q(a) > q(best) || (q(a) == q(best) && a < best)) best = a;
  return best;
}

nlohmann::ordered_json Policy::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "greedy-q-policy";
  j["gamma"] = gamma;
  j["target_x"] = target_x;
  j["target_y"] = target_y;
  j["network"] = net.to_json();
  return j;
}

Policy Policy::from_json(const nlohmann::json& j) {
  Policy p;
  p.gamma = j.at("gamma").get<double>();
  p.target_x = j.at("target_x").get<int>();
  p.target_y = j.at("target_y").get<int>();
  p.net = Mlp::from_json(j.at("network"));
  return p;
}

void Policy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy file " + path);
  out << to_json().dump(2) << "\n";
}

Policy Policy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("policy file is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

namespace {

std::vector<int> valid_action_indices(const AttackEnv& env, const Observation& obs) {
  std::vector<int> out;
  out.reserve(obs.actions.size());
  for (int bus_id : obs.actions) out.push_back(env.network().bus_index(bus_id));
  return out;
}

}  // namespace

TrainResult train(const AttackEnv& env, const TrainConfig& cfg) {
  if (cfg.alpha <= 0.0 || cfg.gamma < 0.0 || cfg.gamma > 1.0)
    throw ConfigError("learning rate must be positive and gamma in [0,1]");
  if (cfg.batch_size <= 0 || cfg.sync_every <= 0 || cfg.total_train_steps <= 0 ||
      cfg.max_steps <= 0 || cfg.max_episodes <= 0)
    throw ConfigError("training step counts must be positive");
  if (cfg.epsilon_final < 0.0 || cfg.epsilon_final > 1.0)
    throw ConfigError("epsilon_final must lie in [0,1]");

  Rng rng(cfg.seed);
  std::vector<int> layout;
  layout.push_back(env.state_size());
  for (int l = 0; l < cfg.hidden_layers; ++l) layout.push_back(cfg.hidden_neurons);
  layout.push_back(env.bus_count());

  TrainResult result;
  Mlp qnet(layout, rng);
  Mlp target = qnet;
  AdamState adam;
  adam.init(qnet);
  ReplayBuffer replay(static_cast<size_t>(cfg.replay_capacity));

  const int decay_steps = std::max(1, cfg.total_train_steps / 2);
  int env_steps = 0;
  int updates = 0;
  bool budget_done = false;

  for (int ep = 0; ep < cfg.max_episodes && !budget_done; ++ep) {
    ++result.episodes;
    int start_bus = env.network().buses[rng.uniform_int(env.bus_count())].id;
    AttackState state = env.reset(start_bus);
    if (env.terminal(state)) continue;

    for (int t = 0; t < cfg.max_steps; ++t) {
      Observation obs = env.observe(state);
      std::vector<int> valid = valid_action_indices(env, obs);
      if (valid.empty()) break;

      double frac = std::min(1.0, static_cast<double>(env_steps) / decay_steps);
      double epsilon = 1.0 + frac * (cfg.epsilon_final - 1.0);

      std::vector<double> enc = env.encode(state);
      int action = select_action(qnet, enc, valid, epsilon, rng);
      StepResult sr = env.step(state, env.network().buses[action].id);
      ++env_steps;

      Transition tr;
      tr.s = std::move(enc);
      tr.action = action;
      tr.reward = sr.reward;
      tr.s2 = env.encode(sr.state);
      tr.valid2 = valid_action_indices(env, sr.obs);
      tr.done = env.terminal(sr.state);
      replay.push(std::move(tr));

      if (replay.size() >= static_cast<size_t>(cfg.batch_size)) {
        auto batch = replay.sample(static_cast<size_t>(cfg.batch_size), rng);
        Mlp::Cache cache;
        BatchEval ev = eval_batch(batch, qnet, target, cfg.gamma, &cache);
        Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(env.bus_count(), cfg.batch_size);
        double loss = 0.0;
        for (int i = 0; i < cfg.batch_size; ++i) {
          double diff = ev.q(batch[i]->action, i) - ev.y[i];
          loss += diff * diff;
          dout(batch[i]->action, i) = 2.0 * diff / cfg.batch_size;
        }
        loss /= cfg.batch_size;
        if (!std::isfinite(loss))
          throw ComputeError("training diverged, loss is not finite");

        Mlp::Grads grads = qnet.backward(cache, dout);
        adam.step(qnet, grads, cfg.alpha);
        ++updates;
        if (updates % cfg.sync_every == 0) target = qnet;

        result.curves.push_back({env_steps, sr.reward, loss});
        if (updates >= cfg.total_train_steps) budget_done = true;
      }

      state = sr.state;
      if (sr.done || budget_done) break;
    }
  }

  if (!qnet.finite()) throw ComputeError("training diverged, parameters are not finite");

  result.env_steps = env_steps;
  result.updates = updates;
  result.policy.net = std::move(qnet);
  result.policy.gamma = cfg.gamma;
  result.policy.target_x = env.config().target_x;
  result.policy.target_y = env.config().target_y;
  return result;
}

EvalResult evaluate(const Policy& policy, const AttackEnv& env,
                    const std::vector<int>& start_buses) {
  if (start_buses.empty()) throw ConfigError("evaluation needs at least one start bus");
  EvalResult out;
  long long total = 0;
  for (int start : start_buses) {
    WalkStats ws;
    ws.start_bus = start;
    AttackState state = env.reset(start);
    ws.walk.push_back(start);

    std::vector<char> visited(env.bus_count(), 0);
    visited[env.network().bus_index(start)] = 1;

    while (!env.terminal(state)) {
      Observation obs = env.observe(state);
      std::vector<int> valid;
      valid.reserve(obs.actions.size());
      for (int bus_id : obs.actions) valid.push_back(env.network().bus_index(bus_id));
      if (valid.empty()) {
        ws.truncated = true;
        break;
      }
      int action = policy.greedy_action(env.encode(state), valid);
      StepResult sr = env.step(state, env.network().buses[action].id);
      state = sr.state;
      ws.walk.push_back(state.current_bus);
      visited[env.network().bus_index(state.current_bus)] = 1;
      if (sr.truncated) {
        ws.truncated = true;
        break;
      }
    }
    ws.transitions = state.step_count;
    for (int i = 0; i < env.bus_count(); ++i) {
      if (!visited[i]) continue;
      if (env.network().buses[i].kind == BusKind::PQ)
        ++ws.pq_visited;
      else
        ++ws.pv_visited;
    }
    total += ws.transitions;
    out.per_start.push_back(std::move(ws));
  }

  out.min_transitions = out.per_start.front().transitions;
  out.max_transitions = out.per_start.front().transitions;
  double pv = 0.0, pq = 0.0;
  for (const auto& ws : out.per_start) {
    out.min_transitions = std::min(out.min_transitions, ws.transitions);
    out.max_transitions = std::max(out.max_transitions, ws.transitions);
    pv += ws.pv_visited;
    pq += ws.pq_visited;
  }
  out.mean_transitions = static_cast<double>(total) / out.per_start.size();
  out.mean_pv = pv / out.per_start.size();
  out.mean_pq = pq / out.per_start.size();
  return out;
}

void write_curves_csv(const std::vector<CurvePoint>& curves, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write curves file " + path);
  out << "step,reward,loss\n";
  for (const auto& c : curves)
    out << c.step << "," << c.reward << "," << c.loss << "\n";
}

}  // namespace gridsec
