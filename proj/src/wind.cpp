#include "gridsec/wind.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gridsec {

const std::vector<double>& WindSeries::at_minute(double minute) const {
  for (int i = 0; i < sample_count(); ++i)
    if (minutes[i] == minute) return power_mw[i];
  throw ConfigError("wind series has no sample at minute " + std::to_string(minute));
}

WindSeries load_wind_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open wind file " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("wind file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  if (cols.size() < 2 || cols[0] != "minute")
    throw ParseError("wind header must start with 'minute' and one farm column");
  for (size_t k = 1; k < cols.size(); ++k) {
    std::string want = "wf" + std::to_string(k) + "_mw";
    if (cols[k] != want)
      throw ParseError("wind header column " + std::to_string(k) + " must be '" + want +
                       "', got '" + cols[k] + "'");
  }
  const size_t farms = cols.size() - 1;

  WindSeries out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("wind file line " + std::to_string(lineno) +
                         ": bad number '" + cell + "'");
      }
    }
    if (row.size() != farms + 1)
      throw ParseError("wind file line " + std::to_string(lineno) + ": expected " +
                       std::to_string(farms + 1) + " cells");
    if (!out.minutes.empty() && row[0] <= out.minutes.back())
      throw ParseError("wind timestamps must be strictly increasing at line " +
                       std::to_string(lineno));
    for (size_t k = 1; k < row.size(); ++k)
      if (row[k] < 0.0)
        throw ParseError("wind power must be nonnegative at line " +
                         std::to_string(lineno));
    out.minutes.push_back(row[0]);
    out.power_mw.emplace_back(row.begin() + 1, row.end());
  }
  if (out.minutes.empty()) throw ParseError("wind file has no samples");
  return out;
}

std::vector<int> scenario_farms(const std::string& label, int n_farms) {
  if (n_farms < 1) throw ConfigError("scenario needs at least one farm");
  if (label.size() < 3 || label[0] != 'S' || label[1] != 'C')
    throw ConfigError("scenario label must look like SC1, got '" + label + "'");
  int k;
  try {
    k = std::stoi(label.substr(2));
  } catch (const std::exception&) {
    throw ConfigError("scenario label must look like SC1, got '" + label + "'");
  }
  const int max_label = (n_farms == 1) ? 1 : 2 * n_farms + 1;
  if (k < 1 || k > max_label)
    throw ConfigError("scenario " + label + " is out of range for " +
                      std::to_string(n_farms) + " farms");
  if (k <= n_farms) return {k - 1};
  if (k <= 2 * n_farms) {
    int base = k - n_farms - 1;
    std::vector<int> pair = {base, (base + 1) % n_farms};
    std::sort(pair.begin(), pair.end());
    return pair;
  }
  std::vector<int> all(n_farms);
  for (int i = 0; i < n_farms; ++i) all[i] = i;
  return all;
}

PowerNetwork apply_injection(const PowerNetwork& net, const WindSeries& series,
                             const WindScenario& scenario) {
  if (scenario.active_farms.empty())
    throw ConfigError("scenario has no active farms");
  if (static_cast<int>(scenario.farm_buses.size()) != series.farm_count())
    throw ConfigError("farm bus mapping has " + std::to_string(scenario.farm_buses.size()) +
                      " entries but the series has " + std::to_string(series.farm_count()) +
                      " farms");
  const auto& row = series.at_minute(scenario.minute);

  PowerNetwork out = net;
  int slack_id = out.buses[out.slack_index()].id;
  double injected = 0.0;
  for (int farm : scenario.active_farms) {
    if (farm < 0 || farm >= series.farm_count())
      throw ConfigError("active farm index " + std::to_string(farm) + " out of range");
    int bus = scenario.farm_buses[farm];
    int idx = out.bus_index(bus);
    if (bus == slack_id)
      throw ConfigError("wind farm cannot sit on the slack bus");
    double mw = row[farm];
    injected += mw;
    if (Generator* g = out.generator_at(bus)) {
      g->output_mw += mw;
      g->max_mw += mw;
    } else {
      out.generators.push_back({bus, mw, mw});
    }
    if (out.buses[idx].kind == BusKind::PQ) out.buses[idx].kind = BusKind::PV;
  }
  std::sort(out.generators.begin(), out.generators.end(),
            [](const Generator& a, const Generator& b) { return a.bus < b.bus; });

  Generator* slack_gen = out.generator_at(slack_id);
  slack_gen->output_mw -= injected;
  if (slack_gen->output_mw < -1e-9)
    throw ConfigError("scenario injects more power than the slack can absorb");
  validate(out);
  return out;
}

}  // namespace gridsec
