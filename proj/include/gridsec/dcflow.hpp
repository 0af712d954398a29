#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gridsec/network.hpp"

namespace gridsec {

struct BranchFlows {
  // signed MW flow per branch, positive in the from->to direction
  std::vector<double> mw;
  std::vector<double> theta;  // bus angles, slack at zero
};

// net injection (generation minus load) per bus index, MW
Eigen::VectorXd injections_mw(const PowerNetwork& net);

BranchFlows dc_power_flow(const PowerNetwork& net);

// branch x bus sensitivity of flow to injection, slack column zero
Eigen::MatrixXd ptdf(const PowerNetwork& net);

}  // namespace gridsec
