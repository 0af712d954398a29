#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridsec/dqn.hpp"
#include "support/nets.hpp"

using namespace gridsec;

namespace {

// nets whose output is exactly the output-layer bias, input ignored
Mlp bias_net(int in, int out, const std::vector<double>& bias) {
  Rng rng(0);
  Mlp net({in, 1, out}, rng);
  net.w[0].setZero();
  net.b[0].setZero();
  net.w[1].setZero();
  for (int i = 0; i < out; ++i) net.b[1](i) = bias[i];
  return net;
}

struct PathEnv {
  PowerNetwork net = support::make_path(4);
  BranchFlows flows = dc_power_flow(net);
  std::vector<NodeScore> scores = score_network(net, ScoringScheme::Cvss31);
  TransitionGraph graph = build_transition_graph(net, flows, scores, 0.05);
  AttackEnv env;

  explicit PathEnv(int max_steps = 20) : env(net, graph, make_cfg(max_steps)) {}

  static EnvConfig make_cfg(int max_steps) {
    EnvConfig cfg;
    cfg.target_x = 0;  // line 1-2
    cfg.target_y = 2;  // line 3-4
    cfg.max_steps = max_steps;
    return cfg;
  }
};

}  // namespace

TEST_CASE("tabular update and td target arithmetic") {
  CHECK(tabular_q_update(1.0, 2.0, 3.0, 0.5, 0.9) == doctest::Approx(2.85));
  CHECK(tabular_q_update(2.0, 0.0, 0.0, 1.0, 0.9) == doctest::Approx(0.0));

  CHECK(td_target(0.29, {0.2, 1.0, -3.0}, false, 0.9) == doctest::Approx(1.19));
  CHECK(td_target(0.29, {0.2, 1.0, -3.0}, true, 0.9) == doctest::Approx(0.29));
  CHECK(td_target(0.29, {}, false, 0.9) == doctest::Approx(0.29));
  CHECK(td_target(1.0, {-2.0, -1.0}, false, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("action selection masks invalid outputs") {
  Mlp net = bias_net(1, 3, {0.1, 0.7, 0.3});
  Rng rng(9);

  SUBCASE("greedy ignores the unreachable best") {
    CHECK(select_action(net, {0.42}, {0, 2}, 0.0, rng) == 2);
    CHECK(select_action(net, {0.42}, {0, 1, 2}, 0.0, rng) == 1);
    CHECK(select_action(net, {0.42}, {0}, 0.0, rng) == 0);
  }
  SUBCASE("ties go to the lowest index") {
    Mlp tie = bias_net(1, 3, {0.5, 0.7, 0.5});
    CHECK(select_action(tie, {0.0}, {0, 2}, 0.0, rng) == 0);
    CHECK(select_action(tie, {0.0}, {2, 0}, 0.0, rng) == 0);
  }
  SUBCASE("full exploration is uniform over the valid set") {
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 3000; ++i) ++counts[select_action(net, {0.0}, {0, 1, 2}, 1.0, rng)];
    for (int c : counts) {
      CHECK(c > 850);
      CHECK(c < 1150);
    }
  }
  SUBCASE("mixed epsilon still never leaves the valid set") {
    for (int i = 0; i < 200; ++i) {
      int a = select_action(net, {0.0}, {0, 2}, 0.5, rng);
      CHECK((a == 0 || a == 2));
    }
  }
  SUBCASE("no valid actions is an error") {
    CHECK_THROWS_AS(select_action(net, {0.0}, {}, 0.0, rng), ComputeError);
  }
}

TEST_CASE("replay buffer is a ring with replacement sampling") {
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);

  ReplayBuffer buf(3);
  Rng rng(4);
  CHECK_THROWS_AS(buf.sample(1, rng), ComputeError);

  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = static_cast<double>(i);
    buf.push(std::move(t));
  }
  REQUIRE(buf.size() == 3);
  // oldest entries overwritten in order: slots hold 3, 4, 2
  CHECK(buf.at(0).reward == doctest::Approx(3.0));
  CHECK(buf.at(1).reward == doctest::Approx(4.0));
  CHECK(buf.at(2).reward == doctest::Approx(2.0));

  auto batch = buf.sample(10, rng);
  REQUIRE(batch.size() == 10);
  for (const Transition* t : batch) {
    double r = t->reward;
    CHECK((r == 2.0 || r == 3.0 || r == 4.0));
  }
}

TEST_CASE("batch loss is the mean squared td error") {
  Mlp qnet = bias_net(1, 1, {0.19});
  Mlp target = bias_net(1, 1, {1.0});

  Transition live;
  live.s = {0.5};
  live.action = 0;
  live.reward = 0.29;
  live.s2 = {0.2};
  live.valid2 = {0};
  live.done = false;

  Transition finished = live;
  finished.reward = 0.5;
  finished.done = true;

  // y = 0.29 + 0.9 * 1.0 = 1.19 against a prediction of 0.19
  CHECK(batch_loss({&live}, qnet, target, 0.9) == doctest::Approx(1.0));
  // terminal target collapses to the reward
  CHECK(batch_loss({&finished}, qnet, target, 0.9) == doctest::Approx(0.31 * 0.31));
  CHECK(batch_loss({&live, &finished}, qnet, target, 0.9) ==
        doctest::Approx((1.0 + 0.31 * 0.31) / 2.0));
  CHECK_THROWS_AS(batch_loss({}, qnet, target, 0.9), ComputeError);
}

TEST_CASE("policy serialization round trip") {
  Policy p;
  p.net = bias_net(6, 4, {0.0, 0.1, 0.2, 0.3});
  p.gamma = 0.9;
  p.target_x = 0;
  p.target_y = 2;

  const std::string path = "tmp_policy_roundtrip.json";
  p.save(path);
  Policy back = Policy::load(path);
  std::remove(path.c_str());

  CHECK(back.gamma == doctest::Approx(0.9));
  CHECK(back.target_x == 0);
  CHECK(back.target_y == 2);
  std::vector<double> enc(6, 0.0);
  enc[2] = 1.0;
  CHECK(back.greedy_action(enc, {0, 1, 3}) == p.greedy_action(enc, {0, 1, 3}));

  CHECK_THROWS_AS(Policy::load("no_such_policy_file.json"), ConfigError);
  {
    std::ofstream bad("tmp_policy_bad.json");
    bad << "{not json";
  }
  CHECK_THROWS_AS(Policy::load("tmp_policy_bad.json"), ParseError);
  std::remove("tmp_policy_bad.json");
}

TEST_CASE("evaluation follows the greedy policy") {
  PathEnv p(10);
  Policy right;  // always prefers the highest-numbered neighbor
  right.net = bias_net(p.env.state_size(), p.env.bus_count(), {0.0, 0.1, 0.2, 0.3});
  right.gamma = 0.9;
  right.target_x = 0;
  right.target_y = 2;

  SUBCASE("clean walks") {
    EvalResult ev = evaluate(right, p.env, {1, 2});
    REQUIRE(ev.per_start.size() == 2);
    CHECK(ev.per_start[0].walk == std::vector<int>{1, 2, 3});
    CHECK(ev.per_start[0].transitions == 2);
    CHECK_FALSE(ev.per_start[0].truncated);
    CHECK(ev.per_start[1].walk == std::vector<int>{2, 3});
    CHECK(ev.per_start[1].transitions == 1);
    CHECK(ev.mean_transitions == doctest::Approx(1.5));
    CHECK(ev.min_transitions == 1);
    CHECK(ev.max_transitions == 2);
    // bus 1 is the only generator-kind bus on the first walk
    CHECK(ev.per_start[0].pv_visited == 1);
    CHECK(ev.per_start[0].pq_visited == 2);
    CHECK(ev.mean_pv == doctest::Approx(0.5));
    CHECK(ev.mean_pq == doctest::Approx(2.0));
  }
  SUBCASE("a policy stuck far from the second line gets cut off") {
    // from bus 3 it bounces between 3 and 4, never reaching line 1-2
    EvalResult ev = evaluate(right, p.env, {3});
    CHECK(ev.per_start[0].truncated);
    CHECK(ev.per_start[0].transitions == 10);
  }
  SUBCASE("no start buses is an error") {
    CHECK_THROWS_AS(evaluate(right, p.env, {}), ConfigError);
  }
}

TEST_CASE("training on a four-bus line reaches both target lines") {
  PathEnv p(20);
  TrainConfig cfg;
  cfg.hidden_neurons = 16;
  cfg.hidden_layers = 2;
  cfg.batch_size = 16;
  cfg.replay_capacity = 200;
  cfg.sync_every = 50;
  cfg.total_train_steps = 400;
  cfg.max_episodes = 500;
  cfg.max_steps = 20;
  cfg.seed = 7;

  TrainResult result = train(p.env, cfg);
  CHECK(result.updates == 400);
  CHECK(result.env_steps == cfg.batch_size - 1 + result.updates);
  REQUIRE(result.curves.size() == static_cast<size_t>(result.updates));
  CHECK(result.curves.front().step == cfg.batch_size);
  for (size_t i = 1; i < result.curves.size(); ++i)
    CHECK(result.curves[i].step == result.curves[i - 1].step + 1);
  CHECK(result.policy.target_x == 0);
  CHECK(result.policy.target_y == 2);

  EvalResult ev = evaluate(result.policy, p.env, {1, 2, 3, 4});
  for (const auto& ws : ev.per_start) CHECK_FALSE(ws.truncated);
  // optimal is (2, 1, 1, 2); leave headroom for an imperfect greedy route
  CHECK(ev.mean_transitions <= 3.0);

  SUBCASE("same seed reproduces the run exactly") {
    TrainResult again = train(p.env, cfg);
    REQUIRE(again.curves.size() == result.curves.size());
    for (size_t i = 0; i < result.curves.size(); ++i) {
      CHECK(again.curves[i].step == result.curves[i].step);
      CHECK(again.curves[i].reward == result.curves[i].reward);
      CHECK(again.curves[i].loss == result.curves[i].loss);
    }
    CHECK(again.policy.net.to_json() == result.policy.net.to_json());
  }
  SUBCASE("a different seed takes a different path") {
    TrainConfig other = cfg;
    other.seed = 8;
    TrainResult alt = train(p.env, other);
    bool differs = alt.curves.size() != result.curves.size();
    for (size_t i = 0; !differs && i < result.curves.size(); ++i)
      differs = alt.curves[i].loss != result.curves[i].loss;
    CHECK(differs);
  }
}

TEST_CASE("training rejects bad settings and runaway divergence") {
  PathEnv p(20);
  TrainConfig cfg;
  cfg.hidden_neurons = 8;
  cfg.batch_size = 8;
  cfg.total_train_steps = 60;
  cfg.seed = 1;

  SUBCASE("configuration checks") {
    TrainConfig bad = cfg;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(train(p.env, bad), ConfigError);
    bad = cfg;
    bad.gamma = 1.5;
    CHECK_THROWS_AS(train(p.env, bad), ConfigError);
    bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(train(p.env, bad), ConfigError);
    bad = cfg;
    bad.epsilon_final = -0.2;
    CHECK_THROWS_AS(train(p.env, bad), ConfigError);
  }
  SUBCASE("an absurd learning rate trips the divergence guard") {
    TrainConfig hot = cfg;
    hot.alpha = 1e200;
    hot.total_train_steps = 200;
    hot.max_episodes = 500;
    CHECK_THROWS_AS(train(p.env, hot), ComputeError);
  }
}

TEST_CASE("curve files are plain csv") {
  std::vector<CurvePoint> pts{{32, 0.5, 1.25}, {33, 2.0, 0.03125}};
  const std::string path = "tmp_curves.csv";
  write_curves_csv(pts, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "step,reward,loss\n32,0.5,1.25\n33,2,0.03125\n");
  std::remove(path.c_str());
}
