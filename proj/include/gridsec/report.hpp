#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gridsec/attack_env.hpp"
#include "gridsec/config.hpp"
#include "gridsec/contingency.hpp"
#include "gridsec/dqn.hpp"

namespace gridsec {

struct MethodStats {
  std::string method;
  std::vector<WalkStats> per_start;
  double mean = 0.0;
  int min = 0;
  int max = 0;
};

MethodStats summarize_method(const std::string& name, std::vector<WalkStats> walks);

struct AssessmentOutput {
  nlohmann::ordered_json report;
  std::vector<CurvePoint> curves;
  std::vector<MethodStats> methods;
  Policy policy;
  std::vector<int> starts;
  std::vector<nlohmann::ordered_json> trace;  // greedy walk, one record per step
  double train_seconds = 0.0;
  double total_seconds = 0.0;
};

// contingency -> scoring -> transition graph -> training -> method comparison
AssessmentOutput run_assessment(const RunConfig& cfg);

// report.json, curves.csv, comparison.csv, policy.json, trace.jsonl
void write_assessment_outputs(const AssessmentOutput& out, const RunConfig& cfg);

std::vector<MethodStats> compare_methods(const RunConfig& cfg,
                                         const std::vector<std::string>& methods);

void write_comparison_csv(const std::vector<MethodStats>& methods,
                          const std::string& path);

// shared helpers for the CLI
PowerNetwork load_configured_case(const RunConfig& cfg);
PowerNetwork apply_configured_wind(const PowerNetwork& net, const RunConfig& cfg);
std::pair<int, int> select_target_pair(const RunConfig& cfg, const PowerNetwork& net,
                                       const N2Result& n2);
std::vector<int> draw_start_buses(const PowerNetwork& net, int count,
                                  std::uint64_t seed);

nlohmann::ordered_json contingency_to_json(const PowerNetwork& net, const N2Result& n2,
                                           const std::vector<SingleOutage>& n1,
                                           const N11Result& n11);

}  // namespace gridsec
