#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridsec/network.hpp"

namespace gridsec {

enum class ScoringScheme { Cvss31, Ivss };

ScoringScheme scheme_from_string(const std::string& s);
const char* to_string(ScoringScheme s);

enum class AttackVector { Network, Adjacent, Local, Physical };
enum class AttackComplexity { Low, High };
enum class PrivilegesRequired { None, Low, High };
enum class UserInteraction { None, Required };
enum class Scope { Unchanged, Changed };
enum class ImpactLevel { High, Low, None };

struct CvssVector {
  AttackVector av = AttackVector::Network;
  AttackComplexity ac = AttackComplexity::Low;
  PrivilegesRequired pr = PrivilegesRequired::None;
  UserInteraction ui = UserInteraction::None;
  Scope scope = Scope::Unchanged;
  ImpactLevel conf = ImpactLevel::None;
  ImpactLevel integ = ImpactLevel::None;
  ImpactLevel avail = ImpactLevel::None;

  bool operator==(const CvssVector&) const = default;
};

// "AV:N/AC:L/PR:N/UI:R/S:U/C:L/I:L/A:L"
CvssVector parse_cvss_vector(const std::string& text);
std::string to_string(const CvssVector& v);

double exploitability(const CvssVector& v, ScoringScheme scheme = ScoringScheme::Cvss31);
double impact_subscore(const CvssVector& v);
double impact(const CvssVector& v);
double base_score(const CvssVector& v, ScoringScheme scheme = ScoringScheme::Cvss31);

// generator buses model hardened control-room access, load buses a softer
// field-device profile
CvssVector default_vector(BusKind kind);

struct NodeScore {
  int bus = 0;
  CvssVector vec;
  double exploit = 0.0;
  double imp = 0.0;
  double base = 0.0;
  bool overridden = false;
};

std::vector<NodeScore> score_network(const PowerNetwork& net,
                                     ScoringScheme scheme = ScoringScheme::Cvss31,
                                     const std::map<int, CvssVector>& overrides = {});

// JSON object mapping bus id (as string key) to a vector string
std::map<int, CvssVector> load_vector_overrides(const std::string& path);

}  // namespace gridsec
