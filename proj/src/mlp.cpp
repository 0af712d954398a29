#include "gridsec/mlp.hpp"

#include <cmath>

namespace gridsec {

Mlp::Mlp(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("network needs at least input and output layers");
  for (int s : sizes_)
    if (s <= 0) throw ConfigError("layer sizes must be positive");
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    int fan_in = sizes_[l];
    int fan_out = sizes_[l + 1];
    double scale = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd wl(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) wl(i, j) = scale * rng.normal();
    w.push_back(std::move(wl));
    b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (size_t l = 0; l < w.size(); ++l) {
    a = (w[l] * a).colwise() + b[l];
    if (l + 1 < w.size()) a = a.cwiseMax(0.0);
  }
  return a;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& x, Cache& cache) const {
  cache.acts.clear();
  cache.pre.clear();
  cache.acts.push_back(x);
  Eigen::MatrixXd a = x;
  for (size_t l = 0; l < w.size(); ++l) {
    Eigen::MatrixXd z = (w[l] * a).colwise() + b[l];
    cache.pre.push_back(z);
    a = (l + 1 < w.size()) ? z.cwiseMax(0.0) : z;
    cache.acts.push_back(a);
  }
  return a;
}

Mlp::Grads Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dout) const {
  Grads g;
  g.w.resize(w.size());
  g.b.resize(b.size());
  Eigen::MatrixXd delta = dout;
  for (int l = static_cast<int>(w.size()) - 1; l >= 0; --l) {
    g.w[l] = delta * cache.acts[l].transpose();
    g.b[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = w[l].transpose() * delta;
      delta = delta.array() * (cache.pre[l - 1].array() > 0.0).cast<double>();
    }
  }
  return g;
}

bool Mlp::finite() const {
  for (const auto& m : w)
    if (!m.allFinite()) return false;
  for (const auto& v : b)
    if (!v.allFinite()) return false;
  return true;
}

nlohmann::ordered_json Mlp::to_json() const {
  nlohmann::ordered_json j;
  j["sizes"] = sizes_;
  j["weights"] = nlohmann::ordered_json::array();
  j["biases"] = nlohmann::ordered_json::array();
  for (const auto& m : w) {
    std::vector<double> flat(m.size());
    for (int i = 0; i < m.rows(); ++i)
      for (int k = 0; k < m.cols(); ++k) flat[static_cast<size_t>(i) * m.cols() + k] = m(i, k);
    j["weights"].push_back(flat);
  }
  for (const auto& v : b)
    j["biases"].push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  net.sizes_ = j.at("sizes").get<std::vector<int>>();
  if (net.sizes_.size() < 2) throw ParseError("stored network has too few layers");
  auto jw = j.at("weights");
  auto jb = j.at("biases");
  if (jw.size() != net.sizes_.size() - 1 || jb.size() != net.sizes_.size() - 1)
    throw ParseError("stored network layer count mismatch");
  for (size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    int rows = net.sizes_[l + 1];
    int cols = net.sizes_[l];
    auto flat = jw[l].get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != rows * cols)
      throw ParseError("stored weight matrix has wrong size");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) m(i, k) = flat[static_cast<size_t>(i) * cols + k];
    net.w.push_back(std::move(m));
    auto bias = jb[l].get<std::vector<double>>();
    if (static_cast<int>(bias.size()) != rows)
      throw ParseError("stored bias vector has wrong size");
    net.b.push_back(Eigen::Map<Eigen::VectorXd>(bias.data(), rows));
  }
  return net;
}

void AdamState::init(const Mlp& net) {
  t = 0;
  mw.clear();
  vw.clear();
  mb.clear();
  vb.clear();
  for (const auto& m : net.w) {
    mw.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
    vw.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  }
  for (const auto& v : net.b) {
    mb.push_back(Eigen::VectorXd::Zero(v.size()));
    vb.push_back(Eigen::VectorXd::Zero(v.size()));
  }
}

void AdamState::step(Mlp& net, const Mlp::Grads& g, double alpha) {
  ++t;
  double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t l = 0; l < net.w.size(); ++l) {
    mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.w[l];
    vw[l] = beta2 * vw[l].array().matrix() + (1.0 - beta2) * g.w[l].array().square().matrix();
    net.w[l].array() -=
        alpha * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);

    mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.b[l];
    vb[l] = beta2 * vb[l].array().matrix() + (1.0 - beta2) * g.b[l].array().square().matrix();
    net.b[l].array() -=
        alpha * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
  }
}

}  // namespace gridsec
