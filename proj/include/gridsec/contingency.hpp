#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/dcflow.hpp"
#include "gridsec/network.hpp"

namespace gridsec {

inline constexpr double kFlowTolMw = 1e-4;      // 1e-6 pu at 100 MVA
inline constexpr double kIslandTol = 1e-8;
inline constexpr int kPruneIterCap = 50;

struct LodfMatrix {
  // l(z, x): flow change on z per MW of pre-outage flow on outaged x.
  // Diagonal entries are NaN; columns of islanding branches are zero.
  Eigen::MatrixXd l;
  std::vector<char> bridge;  // branch whose single outage splits the network
};

LodfMatrix lodf(const PowerNetwork& net, const Eigen::MatrixXd& ptdf_matrix);
LodfMatrix lodf(const PowerNetwork& net);

struct DoubleOutageFlows {
  bool islanding = false;
  std::vector<double> mw;  // post-outage flows; outaged branches carry zero
};

// closed-form flows after removing branches x and y together
DoubleOutageFlows double_outage_flows(const PowerNetwork& net, const BranchFlows& flows,
                                      const LodfMatrix& lodf_m, int x, int y);

// distribution-factor overload condition for monitored branch z with rating
// c_mw under the simultaneous outage of x and y
bool overload_test(const BranchFlows& flows, const LodfMatrix& lodf_m, int x, int y,
                   int z, double c_mw);

struct Violation {
  int branch = 0;
  double post_flow_mw = 0.0;
  double rating_mw = 0.0;
};

struct OutagePair {
  int x = 0;
  int y = 0;
  bool islanding = false;
  std::vector<Violation> violations;
  double severity = 0.0;  // max |flow|/rating over violations
};

struct SingleOutage {
  int branch = 0;
  bool islanding = false;
  std::vector<Violation> violations;
  double severity = 0.0;
};

struct N2Result {
  std::vector<OutagePair> violating;  // non-islanding pairs with overloads
  std::vector<OutagePair> islanding;
  long long pairs_total = 0;
  long long pairs_pruned = 0;
  int prune_iterations = 0;
};

// bounded screening of all branch pairs followed by the exact closed-form
// check on survivors
N2Result prune_n2(const PowerNetwork& net, const BranchFlows& flows);

// independent route: re-solves the power flow for every pair
N2Result exhaustive_n2(const PowerNetwork& net);

std::vector<SingleOutage> enumerate_n1(const PowerNetwork& net);

struct N11Result {
  std::optional<int> removed_branch;  // most severe non-islanding first outage
  std::vector<SingleOutage> outages;  // follow-up outages on the weakened net
};

N11Result enumerate_n11(const PowerNetwork& net);

// islanding pairs first, then by severity descending; ties by branch ids
std::vector<OutagePair> rank_severity(const N2Result& result);

}  // namespace gridsec
