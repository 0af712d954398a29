#pragma once

#include <string>
#include <vector>

#include "gridsec/network.hpp"

namespace gridsec {

struct WindSeries {
  std::vector<double> minutes;                // strictly increasing
  std::vector<std::vector<double>> power_mw;  // [sample][farm]

  int farm_count() const {
    return power_mw.empty() ? 0 : static_cast<int>(power_mw.front().size());
  }
  int sample_count() const { return static_cast<int>(minutes.size()); }

  // row for an exact timestamp; throws when absent
  const std::vector<double>& at_minute(double minute) const;
};

// header "minute,wf1_mw,...,wfN_mw"; powers must be nonnegative
WindSeries load_wind_csv(const std::string& path);

struct WindScenario {
  std::vector<int> farm_buses;   // column k feeds farm_buses[k]
  std::vector<int> active_farms; // 0-based column indices, nonempty, sorted
  double minute = 0.0;
};

// "SC3" style label to the active-farm subsets: single farms first, then
// consecutive pairs wrapping around, then all farms together
std::vector<int> scenario_farms(const std::string& label, int n_farms);

// adds the scenario injections as generation, marks injection buses PV, and
// backs the slack off by the injected total
PowerNetwork apply_injection(const PowerNetwork& net, const WindSeries& series,
                             const WindScenario& scenario);

}  // namespace gridsec
