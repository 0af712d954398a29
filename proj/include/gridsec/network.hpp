#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridsec/common.hpp"

namespace gridsec {

enum class BusKind { Slack, PV, PQ };

const char* to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& s);

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double load_mw = 0.0;
  std::string name;
};

struct Generator {
  int bus = 0;
  double output_mw = 0.0;
  double max_mw = 0.0;
};

struct Branch {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance_pu = 0.0;
  double rating_mw = 0.0;
  // true when the input had no usable rating and the fallback rule filled it
  bool rating_assumed = false;
};

struct PowerNetwork {
  double base_mva = 100.0;
  std::vector<Bus> buses;            // sorted by id, ids contiguous
  std::vector<Generator> generators; // at most one per bus
  std::vector<Branch> branches;

  int bus_count() const { return static_cast<int>(buses.size()); }
  int branch_count() const { return static_cast<int>(branches.size()); }

  // position of a bus id in `buses`; throws on unknown id
  int bus_index(int bus_id) const;
  int slack_index() const;

  const Generator* generator_at(int bus_id) const;
  Generator* generator_at(int bus_id);

  double total_load_mw() const;
  double total_generation_mw() const;

  // neighbor bus indices per bus index, ascending, parallel branches deduped
  std::vector<std::vector<int>> adjacency() const;

  bool connected() const;
};

bool operator==(const PowerNetwork& a, const PowerNetwork& b);

// Structural validation: contiguous ids, exactly one slack bus backed by a
// generator, nonzero reactances, positive ratings, generator limits respected,
// generation matching load, connectivity.
void validate(const PowerNetwork& net);

struct CaseOptions {
  // missing branch ratings become max(1.2 * |base flow|, floor)
  double rating_floor_mw = 10.0;
  // shift the slack generator so generation covers load before validating
  bool rebalance_slack = true;
};

// sorts buses, merges duplicate generators, assigns branch ids, rebalances the
// slack, fills missing ratings, then validates; for programmatically built nets
void finalize_case(PowerNetwork& net, const CaseOptions& opts);

PowerNetwork parse_case_text(const std::string& text, const CaseOptions& opts = {});
PowerNetwork parse_case(const std::string& path, const CaseOptions& opts = {});
std::string serialize_case(const PowerNetwork& net);
void write_case(const PowerNetwork& net, const std::string& path);

// Reads the MATLAB-style matrix case format (mpc.baseMVA / mpc.bus /
// mpc.gen / mpc.branch blocks). Out-of-service rows are dropped, negative
// loads become generators, non-contiguous bus ids are renumbered with the
// original id recorded in the bus name.
PowerNetwork import_matrix_case(const std::string& path, const CaseOptions& opts = {});

}  // namespace gridsec
