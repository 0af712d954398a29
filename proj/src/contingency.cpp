#include "gridsec/contingency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace gridsec {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double pair_denominator(const LodfMatrix& lodf_m, int x, int y) {
  return 1.0 - lodf_m.l(x, y) * lodf_m.l(y, x);
}

bool pair_islands(const LodfMatrix& lodf_m, int x, int y) {
  return std::abs(pair_denominator(lodf_m, x, y)) <= kIslandTol;
}

std::vector<Violation> collect_violations(const PowerNetwork& net,
                                          const std::vector<double>& post_mw,
                                          int skip_a, int skip_b) {
  std::vector<Violation> out;
  for (int z = 0; z < net.branch_count(); ++z) {
    if (z == skip_a || z == skip_b) continue;
    double c = net.branches[z].rating_mw;
    if (std::abs(post_mw[z]) > c + kFlowTolMw)
      out.push_back({net.branches[z].id, post_mw[z], c});
  }
  return out;
}

double max_ratio(const std::vector<Violation>& violations) {
  double r = 0.0;
  for (const auto& v : violations) r = std::max(r, std::abs(v.post_flow_mw) / v.rating_mw);
  return r;
}

}  // namespace

LodfMatrix lodf(const PowerNetwork& net, const Eigen::MatrixXd& h) {
  const int m = net.branch_count();
  LodfMatrix out;
  out.l = Eigen::MatrixXd::Zero(m, m);
  out.bridge.assign(m, 0);
  for (int x = 0; x < m; ++x) {
    int f = net.bus_index(net.branches[x].from_bus);
    int t = net.bus_index(net.branches[x].to_bus);
    Eigen::VectorXd num = h.col(f) - h.col(t);
    double denom = 1.0 - num(x);
    if (std::abs(denom) <= kIslandTol) {
      out.bridge[x] = 1;
    } else {
      out.l.col(x) = num / denom;
    }
    out.l(x, x) = kNan;
  }
  return out;
}

LodfMatrix lodf(const PowerNetwork& net) { return lodf(net, ptdf(net)); }

DoubleOutageFlows double_outage_flows(const PowerNetwork& net, const BranchFlows& flows,
                                      const LodfMatrix& lodf_m, int x, int y) {
  DoubleOutageFlows out;
  if (x == y) throw ComputeError("double outage needs two distinct branches");
  if (lodf_m.bridge[x] || lodf_m.bridge[y] || pair_islands(lodf_m, x, y)) {
    out.islanding = true;
    return out;
  }
  const int m = net.branch_count();
  const double fx = flows.mw[x];
  const double fy = flows.mw[y];
  const double d = pair_denominator(lodf_m, x, y);
  const double gx = (fx + lodf_m.l(x, y) * fy) / d;
  const double gy = (fy + lodf_m.l(y, x) * fx) / d;
  out.mw.resize(m);
  for (int z = 0; z < m; ++z) {
    if (z == x || z == y) {
      out.mw[z] = 0.0;
      continue;
    }
    out.mw[z] = flows.mw[z] + lodf_m.l(z, x) * gx + lodf_m.l(z, y) * gy;
  }
  return out;
}

bool overload_test(const BranchFlows& flows, const LodfMatrix& lodf_m, int x, int y,
                   int z, double c_mw) {
  if (z == x || z == y || x == y) return false;
  if (lodf_m.bridge[x] || lodf_m.bridge[y] || pair_islands(lodf_m, x, y)) return false;
  const double fx = flows.mw[x];
  const double fy = flows.mw[y];
  const double fz = flows.mw[z];
  const double d = pair_denominator(lodf_m, x, y);
  // products A_xy*B_xc grouped so a zero flow on x or y stays finite
  const double px = (fx + lodf_m.l(x, y) * fy) / d * lodf_m.l(z, x);
  const double py = (fy + lodf_m.l(y, x) * fx) / d * lodf_m.l(z, y);
  const double upper = (px + py) / (c_mw - fz);
  const double lower = (px + py) / (-c_mw - fz);
  return upper > 1.0 || lower > 1.0;
}

namespace {

struct PruneState {
  std::vector<int> live;           // non-bridge branch positions
  std::vector<char> candidate;     // m*m pair matrix
  long long candidates = 0;
};

}  // namespace

N2Result prune_n2(const PowerNetwork& net, const BranchFlows& flows) {
  const int m = net.branch_count();
  N2Result result;
  if (m < 2) return result;

  Eigen::MatrixXd h = ptdf(net);
  LodfMatrix lodf_m = lodf(net, h);

  std::vector<int> live;
  for (int x = 0; x < m; ++x)
    if (!lodf_m.bridge[x]) live.push_back(x);

  // pairs where both branches survive alone but the pair splits the grid
  for (size_t i = 0; i < live.size(); ++i)
    for (size_t j = i + 1; j < live.size(); ++j)
      if (pair_islands(lodf_m, live[i], live[j])) {
        OutagePair p;
        p.x = net.branches[live[i]].id;
        p.y = net.branches[live[j]].id;
        p.islanding = true;
        result.islanding.push_back(p);
      }

  // bound factor per monitored branch: worst |L(z,x)| over slack to either
  // rating side; a base flow at or past its rating disables pruning via x
  bool base_feasible = true;
  for (int z = 0; z < m; ++z)
    if (std::abs(flows.mw[z]) >= net.branches[z].rating_mw) base_feasible = false;

  std::vector<double> bmax(m, std::numeric_limits<double>::infinity());
  if (base_feasible) {
    for (int x : live) {
      double worst = 0.0;
      for (int z = 0; z < m; ++z) {
        if (z == x) continue;
        double head_u = net.branches[z].rating_mw - flows.mw[z];
        double head_l = net.branches[z].rating_mw + flows.mw[z];
        double head = std::min(head_u, head_l);
        worst = std::max(worst, std::abs(lodf_m.l(z, x)) / head);
      }
      bmax[x] = worst;
    }
  }

  std::vector<char> candidate(static_cast<size_t>(m) * m, 0);
  auto cand = [&](int x, int y) -> char& { return candidate[static_cast<size_t>(x) * m + y]; };
  long long n_candidates = 0;
  for (size_t i = 0; i < live.size(); ++i)
    for (size_t j = i + 1; j < live.size(); ++j) {
      int x = live[i];
      int y = live[j];
      if (pair_islands(lodf_m, x, y)) continue;
      cand(x, y) = 1;
      ++n_candidates;
    }
  result.pairs_total = n_candidates;

  std::vector<double> amax(m, 0.0);
  for (int iter = 0; iter < kPruneIterCap && base_feasible; ++iter) {
    ++result.prune_iterations;
    std::fill(amax.begin(), amax.end(), 0.0);
    for (size_t i = 0; i < live.size(); ++i)
      for (size_t j = i + 1; j < live.size(); ++j) {
        int x = live[i];
        int y = live[j];
        if (!cand(x, y)) continue;
        double d = std::abs(pair_denominator(lodf_m, x, y));
        double ax = std::abs(flows.mw[x] + lodf_m.l(x, y) * flows.mw[y]) / d;
        double ay = std::abs(flows.mw[y] + lodf_m.l(y, x) * flows.mw[x]) / d;
        amax[x] = std::max(amax[x], ax);
        amax[y] = std::max(amax[y], ay);
      }
    long long pruned_now = 0;
    for (size_t i = 0; i < live.size(); ++i)
      for (size_t j = i + 1; j < live.size(); ++j) {
        int x = live[i];
        int y = live[j];
        if (!cand(x, y)) continue;
        if (amax[x] * bmax[x] + amax[y] * bmax[y] <= 1.0) {
          cand(x, y) = 0;
          ++pruned_now;
        }
      }
    result.pairs_pruned += pruned_now;
    if (pruned_now == 0) break;
    if (iter + 1 == kPruneIterCap)
      throw ComputeError("pair screening did not reach a fixed point in " +
                         std::to_string(kPruneIterCap) + " iterations");
  }

  for (size_t i = 0; i < live.size(); ++i)
    for (size_t j = i + 1; j < live.size(); ++j) {
      int x = live[i];
      int y = live[j];
      if (!cand(x, y)) continue;
      DoubleOutageFlows post = double_outage_flows(net, flows, lodf_m, x, y);
      auto violations = collect_violations(net, post.mw, x, y);
      if (violations.empty()) continue;
      OutagePair p;
      p.x = net.branches[x].id;
      p.y = net.branches[y].id;
      p.severity = max_ratio(violations);
      p.violations = std::move(violations);
      result.violating.push_back(p);
    }
  return result;
}

N2Result exhaustive_n2(const PowerNetwork& net) {
  const int m = net.branch_count();
  N2Result result;
  if (m < 2) return result;

  LodfMatrix lodf_m = lodf(net);
  std::vector<int> live;
  for (int x = 0; x < m; ++x)
    if (!lodf_m.bridge[x]) live.push_back(x);

  PowerNetwork reduced = net;
  for (size_t i = 0; i < live.size(); ++i) {
    for (size_t j = i + 1; j < live.size(); ++j) {
      int x = live[i];
      int y = live[j];
      ++result.pairs_total;
      reduced.branches.clear();
      for (int z = 0; z < m; ++z)
        if (z != x && z != y) reduced.branches.push_back(net.branches[z]);

      OutagePair p;
      p.x = net.branches[x].id;
      p.y = net.branches[y].id;
      if (!reduced.connected()) {
        p.islanding = true;
        result.islanding.push_back(p);
        continue;
      }
      BranchFlows post = dc_power_flow(reduced);
      std::vector<Violation> violations;
      for (size_t k = 0; k < reduced.branches.size(); ++k) {
        double c = reduced.branches[k].rating_mw;
        if (std::abs(post.mw[k]) > c + kFlowTolMw)
          violations.push_back({reduced.branches[k].id, post.mw[k], c});
      }
      if (violations.empty()) continue;
      p.severity = max_ratio(violations);
      p.violations = std::move(violations);
      result.violating.push_back(p);
    }
  }
  return result;
}

std::vector<SingleOutage> enumerate_n1(const PowerNetwork& net) {
  const int m = net.branch_count();
  std::vector<SingleOutage> out;
  if (m == 0) return out;
  BranchFlows flows = dc_power_flow(net);
  LodfMatrix lodf_m = lodf(net);
  for (int x = 0; x < m; ++x) {
    SingleOutage so;
    so.branch = net.branches[x].id;
    if (lodf_m.bridge[x]) {
      so.islanding = true;
      out.push_back(so);
      continue;
    }
    std::vector<double> post(m);
    for (int z = 0; z < m; ++z)
      post[z] = (z == x) ? 0.0 : flows.mw[z] + lodf_m.l(z, x) * flows.mw[x];
    so.violations = collect_violations(net, post, x, x);
    if (so.violations.empty()) continue;
    so.severity = max_ratio(so.violations);
    out.push_back(so);
  }
  return out;
}

N11Result enumerate_n11(const PowerNetwork& net) {
  N11Result result;
  auto base = enumerate_n1(net);
  const SingleOutage* worst = nullptr;
  for (const auto& so : base) {
    if (so.islanding) continue;
    if (!worst || so.severity > worst->severity ||
        (so.severity == worst->severity && so.branch < worst->branch))
      worst = &so;
  }
  if (!worst) return result;
  result.removed_branch = worst->branch;

  PowerNetwork reduced = net;
  reduced.branches.clear();
  for (const auto& br : net.branches)
    if (br.id != *result.removed_branch) reduced.branches.push_back(br);
  result.outages = enumerate_n1(reduced);
  return result;
}

std::vector<OutagePair> rank_severity(const N2Result& result) {
  std::vector<OutagePair> ranked = result.islanding;
  std::sort(ranked.begin(), ranked.end(), [](const OutagePair& a, const OutagePair& b) {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
  });
  std::vector<OutagePair> overloads = result.violating;
  std::sort(overloads.begin(), overloads.end(),
            [](const OutagePair& a, const OutagePair& b) {
              if (a.severity != b.severity) return a.severity > b.severity;
              return std::tie(a.x, a.y) < std::tie(b.x, b.y);
            });
  ranked.insert(ranked.end(), overloads.begin(), overloads.end());
  return ranked;
}

}  // namespace gridsec
