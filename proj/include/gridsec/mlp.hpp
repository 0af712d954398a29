#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridsec/common.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

// Fully connected network, rectified-linear hidden layers, linear output.
// Batches are stored one sample per column.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, Rng& rng);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  struct Cache {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts.back() = output
    std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
  };
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x, Cache& cache) const;

  struct Grads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
  };
  // dout = dLoss/d(output), same shape as the cached output
  Grads backward(const Cache& cache, const Eigen::MatrixXd& dout) const;

  std::vector<Eigen::MatrixXd> w;  // w[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> b;

  bool finite() const;

  nlohmann::ordered_json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<int> sizes_;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;

  void init(const Mlp& net);
  void step(Mlp& net, const Mlp::Grads& g, double alpha);
};

}  // namespace gridsec
