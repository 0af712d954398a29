#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/mlp.hpp"

using namespace gridsec;

namespace {

double mse(const Eigen::MatrixXd& out, const Eigen::MatrixXd& target) {
  return (out - target).array().square().sum() / out.cols();
}

Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& out, const Eigen::MatrixXd& target) {
  return 2.0 * (out - target) / out.cols();
}

}  // namespace

TEST_CASE("shapes and deterministic construction") {
  Rng rng(42);
  Mlp net({5, 16, 3}, rng);
  REQUIRE(net.w.size() == 2);
  REQUIRE(net.b.size() == 2);
  CHECK(net.w[0].rows() == 16);
  CHECK(net.w[0].cols() == 5);
  CHECK(net.w[1].rows() == 3);
  CHECK(net.b[0].size() == 16);
  CHECK(net.b[1].size() == 3);
  CHECK(net.input_size() == 5);
  CHECK(net.output_size() == 3);
  CHECK(net.finite());

  Rng rng2(42);
  Mlp same({5, 16, 3}, rng2);
  CHECK(net.w[0] == same.w[0]);
  CHECK(net.w[1] == same.w[1]);

  Rng rng3(43);
  Mlp other({5, 16, 3}, rng3);
  CHECK(net.w[0] != other.w[0]);

  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 7);
  Eigen::MatrixXd y = net.forward(x);
  CHECK(y.rows() == 3);
  CHECK(y.cols() == 7);

  // vector overload agrees with the one-column batch
  Eigen::VectorXd v = x.col(2);
  Eigen::VectorXd yv = net.forward(v);
  CHECK((yv - y.col(2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(7);
  Mlp net({4, 9, 6, 2}, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 8);
  Eigen::MatrixXd target = Eigen::MatrixXd::Random(2, 8);

  // keep every pre-activation away from the relu kink
  Mlp::Cache cache;
  net.forward_cached(x, cache);
  for (const auto& pre : cache.pre)
    for (int i = 0; i < pre.rows(); ++i)
      for (int j = 0; j < pre.cols(); ++j) REQUIRE(std::abs(pre(i, j)) > 1e-5);

  Mlp::Grads g = net.backward(cache, mse_grad(cache.acts.back(), target));
  REQUIRE(g.w.size() == 3);
  REQUIRE(g.b.size() == 3);

  const double h = 1e-6;
  for (size_t l = 0; l < net.w.size(); ++l) {
    Eigen::MatrixXd num(net.w[l].rows(), net.w[l].cols());
    for (int i = 0; i < net.w[l].rows(); ++i)
      for (int j = 0; j < net.w[l].cols(); ++j) {
        double keep = net.w[l](i, j);
        net.w[l](i, j) = keep + h;
        double up = mse(net.forward(x), target);
        net.w[l](i, j) = keep - h;
        double down = mse(net.forward(x), target);
        net.w[l](i, j) = keep;
        num(i, j) = (up - down) / (2.0 * h);
      }
    double rel = (num - g.w[l]).norm() / std::max(1e-12, num.norm());
    CHECK(rel < 1e-4);

    Eigen::VectorXd numb(net.b[l].size());
    for (int i = 0; i < net.b[l].size(); ++i) {
      double keep = net.b[l](i);
      net.b[l](i) = keep + h;
      double up = mse(net.forward(x), target);
      net.b[l](i) = keep - h;
      double down = mse(net.forward(x), target);
      net.b[l](i) = keep;
      numb(i) = (up - down) / (2.0 * h);
    }
    double relb = (numb - g.b[l]).norm() / std::max(1e-12, numb.norm());
    CHECK(relb < 1e-4);
  }
}

TEST_CASE("relu path zeroes gradients of inactive units") {
  Rng rng(3);
  Mlp net({1, 2, 1}, rng);
  net.w[0] << 1.0, -1.0;
  net.b[0] << 0.0, 0.0;
  net.w[1] << 1.0, 1.0;
  net.b[1] << 0.0;

  Eigen::MatrixXd x(1, 1);
  x << 2.0;  // unit 0 active (2), unit 1 clamped (-2 -> 0)
  Mlp::Cache cache;
  Eigen::MatrixXd out = net.forward_cached(x, cache);
  CHECK(out(0, 0) == doctest::Approx(2.0));

  Eigen::MatrixXd dout(1, 1);
  dout << 1.0;
  Mlp::Grads g = net.backward(cache, dout);
  CHECK(g.w[1](0, 0) == doctest::Approx(2.0));  // d/dw via active unit
  CHECK(g.w[1](0, 1) == doctest::Approx(0.0));  // clamped activation
  CHECK(g.w[0](0, 0) == doctest::Approx(2.0));
  CHECK(g.w[0](1, 0) == doctest::Approx(0.0));  // no gradient through the clamp
}

TEST_CASE("adam first step moves each weight by roughly alpha") {
  Rng rng(11);
  Mlp net({2, 4, 1}, rng);
  Mlp before = net;

  Mlp::Grads g;
  for (size_t l = 0; l < net.w.size(); ++l) {
    g.w.push_back(Eigen::MatrixXd::Constant(net.w[l].rows(), net.w[l].cols(), 0.3));
    g.b.push_back(Eigen::VectorXd::Constant(net.b[l].size(), -0.7));
  }

  AdamState opt;
  opt.init(net);
  opt.step(net, g, 0.005);
  CHECK(opt.t == 1);

  // bias-corrected first step is alpha * g / (|g| + eps'), i.e. close to alpha
  for (size_t l = 0; l < net.w.size(); ++l) {
    Eigen::MatrixXd delta = net.w[l] - before.w[l];
    for (int i = 0; i < delta.rows(); ++i)
      for (int j = 0; j < delta.cols(); ++j) CHECK(delta(i, j) == doctest::Approx(-0.005).epsilon(1e-3));
    Eigen::VectorXd db = net.b[l] - before.b[l];
    for (int i = 0; i < db.size(); ++i) CHECK(db(i) == doctest::Approx(0.005).epsilon(1e-3));
  }
}

TEST_CASE("adam converges on a small regression") {
  Rng rng(5);
  Mlp net({1, 8, 1}, rng);
  Eigen::MatrixXd x(1, 16);
  Eigen::MatrixXd y(1, 16);
  for (int i = 0; i < 16; ++i) {
    double t = -1.0 + 2.0 * i / 15.0;
    x(0, i) = t;
    y(0, i) = t * t;
  }

  AdamState opt;
  opt.init(net);
  double first = mse(net.forward(x), y);
  for (int it = 0; it < 400; ++it) {
    Mlp::Cache cache;
    net.forward_cached(x, cache);
    Mlp::Grads g = net.backward(cache, mse_grad(cache.acts.back(), y));
    opt.step(net, g, 0.01);
  }
  double last = mse(net.forward(x), y);
  CHECK(last < 0.05 * first);
  CHECK(net.finite());
}

TEST_CASE("serialization round trip preserves behavior") {
  Rng rng(21);
  Mlp net({3, 5, 2}, rng);
  nlohmann::ordered_json j = net.to_json();
  Mlp back = Mlp::from_json(j);

  REQUIRE(back.sizes() == net.sizes());
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
  CHECK((net.forward(x) - back.forward(x)).norm() == doctest::Approx(0.0));
}

TEST_CASE("finite flags poisoned weights") {
  Rng rng(1);
  Mlp net({2, 3, 1}, rng);
  CHECK(net.finite());
  net.w[1](0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(net.finite());
}
