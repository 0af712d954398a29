#include "gridsec/dcflow.hpp"

#include <cmath>

namespace gridsec {

namespace {

// susceptance matrix with the slack row/column dropped
Eigen::MatrixXd reduced_b(const PowerNetwork& net, std::vector<int>& red_index) {
  const int n = net.bus_count();
  const int slack = net.slack_index();
  red_index.assign(n, -1);
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (i != slack) red_index[i] = k++;

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (const auto& br : net.branches) {
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    double y = 1.0 / br.reactance_pu;
    int rf = red_index[f];
    int rt = red_index[t];
    if (rf >= 0) b(rf, rf) += y;
    if (rt >= 0) b(rt, rt) += y;
    if (rf >= 0 && rt >= 0) {
      b(rf, rt) -= y;
      b(rt, rf) -= y;
    }
  }
  return b;
}

Eigen::LDLT<Eigen::MatrixXd> factorize(const PowerNetwork& net,
                                       std::vector<int>& red_index) {
  if (!net.connected()) throw ComputeError("power flow on a disconnected network");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced_b(net, red_index));
  if (ldlt.info() != Eigen::Success)
    throw ComputeError("susceptance matrix factorization failed");
  return ldlt;
}

}  // namespace

Eigen::VectorXd injections_mw(const PowerNetwork& net) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(net.bus_count());
  for (int i = 0; i < net.bus_count(); ++i) p(i) = -net.buses[i].load_mw;
  for (const auto& g : net.generators) p(net.bus_index(g.bus)) += g.output_mw;
  return p;
}

BranchFlows dc_power_flow(const PowerNetwork& net) {
  const int n = net.bus_count();
  const int slack = net.slack_index();
  std::vector<int> red_index;
  auto ldlt = factorize(net, red_index);

  Eigen::VectorXd p = injections_mw(net) / net.base_mva;
  Eigen::VectorXd p_red(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != slack) p_red(red_index[i]) = p(i);

  Eigen::VectorXd theta_red = ldlt.solve(p_red);
  if (!theta_red.allFinite()) throw ComputeError("power flow solve produced non-finite angles");

  BranchFlows out;
  out.theta.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (i != slack) out.theta[i] = theta_red(red_index[i]);

  out.mw.resize(net.branch_count());
  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& br = net.branches[b];
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    out.mw[b] = (out.theta[f] - out.theta[t]) / br.reactance_pu * net.base_mva;
  }
  return out;
}

Eigen::MatrixXd ptdf(const PowerNetwork& net) {
  const int n = net.bus_count();
  const int m = net.branch_count();
  const int slack = net.slack_index();
  std::vector<int> red_index;
  auto ldlt = factorize(net, red_index);

  // columns of the reduced inverse, expanded with a zero slack row
  Eigen::MatrixXd binv = ldlt.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
  if (!binv.allFinite()) throw ComputeError("sensitivity solve produced non-finite values");

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, n);
  for (int b = 0; b < m; ++b) {
    const Branch& br = net.branches[b];
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    double y = 1.0 / br.reactance_pu;
    for (int i = 0; i < n; ++i) {
      if (i == slack) continue;
      double xf = (f == slack) ? 0.0 : binv(red_index[f], red_index[i]);
      double xt = (t == slack) ? 0.0 : binv(red_index[t], red_index[i]);
      h(b, i) = y * (xf - xt);
    }
  }
  return h;
}

}  // namespace gridsec
