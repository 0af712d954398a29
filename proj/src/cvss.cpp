#include "gridsec/cvss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gridsec {

ScoringScheme scheme_from_string(const std::string& s) {
  std::string low;
  for (char c : s) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "cvss" || low == "cvss31" || low == "cvss3.1") return ScoringScheme::Cvss31;
  if (low == "ivss") return ScoringScheme::Ivss;
  throw ConfigError("unknown scoring scheme '" + s + "' (expected cvss or ivss)");
}

const char* to_string(ScoringScheme s) {
  return s == ScoringScheme::Cvss31 ? "cvss" : "ivss";
}

namespace {

double av_weight(AttackVector av, ScoringScheme s) {
  if (s == ScoringScheme::Cvss31) {
    switch (av) {
      case AttackVector::Network: return 0.85;
      case AttackVector::Adjacent: return 0.62;
      case AttackVector::Local: return 0.55;
      case AttackVector::Physical: return 0.2;
    }
  } else {
    switch (av) {
      case AttackVector::Network: return 1.0;
      case AttackVector::Adjacent: return 0.7;
      case AttackVector::Local: return 0.4;
      case AttackVector::Physical: return 0.2;
    }
  }
  throw ConfigError("bad attack vector");
}

double ac_weight(AttackComplexity ac, ScoringScheme s) {
  if (s == ScoringScheme::Cvss31) return ac == AttackComplexity::Low ? 0.77 : 0.44;
  return ac == AttackComplexity::Low ? 1.0 : 0.2;
}

double pr_weight(PrivilegesRequired pr, Scope scope, ScoringScheme s) {
  if (s == ScoringScheme::Cvss31) {
    switch (pr) {
      case PrivilegesRequired::None: return 0.85;
      case PrivilegesRequired::Low: return scope == Scope::Changed ? 0.68 : 0.62;
      case PrivilegesRequired::High: return scope == Scope::Changed ? 0.5 : 0.27;
    }
  } else {
    switch (pr) {
      case PrivilegesRequired::None: return 1.0;
      case PrivilegesRequired::Low: return 0.6;
      case PrivilegesRequired::High: return 0.2;
    }
  }
  throw ConfigError("bad privileges metric");
}

double ui_weight(UserInteraction ui, ScoringScheme s) {
  if (s == ScoringScheme::Cvss31) return ui == UserInteraction::None ? 0.85 : 0.62;
  return ui == UserInteraction::None ? 1.0 : 0.3;
}

double impact_weight(ImpactLevel lv) {
  switch (lv) {
    case ImpactLevel::High: return 0.56;
    case ImpactLevel::Low: return 0.22;
    case ImpactLevel::None: return 0.0;
  }
  throw ConfigError("bad impact level");
}

}  // namespace

double exploitability(const CvssVector& v, ScoringScheme scheme) {
  return 8.22 * av_weight(v.av, scheme) * ac_weight(v.ac, scheme) *
         pr_weight(v.pr, v.scope, scheme) * ui_weight(v.ui, scheme);
}

double impact_subscore(const CvssVector& v) {
  return 1.0 - (1.0 - impact_weight(v.conf)) * (1.0 - impact_weight(v.integ)) *
                   (1.0 - impact_weight(v.avail));
}

double impact(const CvssVector& v) {
  double isc = impact_subscore(v);
  if (v.scope == Scope::Unchanged) return 6.42 * isc;
  return 7.52 * (isc - 0.029) - 3.25 * std::pow(isc - 0.02, 15.0);
}

double base_score(const CvssVector& v, ScoringScheme scheme) {
  double imp = impact(v);
  if (imp <= 0.0) return 0.0;
  double e = exploitability(v, scheme);
  if (v.scope == Scope::Unchanged) return std::min(e + imp, 10.0);
  return std::min(1.08 * (e + imp), 10.0);
}

namespace {

std::string metric_token(const std::string& part, const std::string& key) {
  auto colon = part.find(':');
  if (colon == std::string::npos || part.substr(0, colon) != key)
    throw ParseError("vector segment '" + part + "' does not match metric " + key);
  return part.substr(colon + 1);
}

}  // namespace

CvssVector parse_cvss_vector(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '/')) parts.push_back(item);
  if (parts.size() != 8)
    throw ParseError("vector '" + text + "' needs 8 metrics AV,AC,PR,UI,S,C,I,A");

  CvssVector v;
  std::string t = metric_token(parts[0], "AV");
  if (t == "N") v.av = AttackVector::Network;
  else if (t == "A") v.av = AttackVector::Adjacent;
  else if (t == "L") v.av = AttackVector::Local;
  else if (t == "P") v.av = AttackVector::Physical;
  else throw ParseError("bad AV value " + t);

  t = metric_token(parts[1], "AC");
  if (t == "L") v.ac = AttackComplexity::Low;
  else if (t == "H") v.ac = AttackComplexity::High;
  else throw ParseError("bad AC value " + t);

  t = metric_token(parts[2], "PR");
  if (t == "N") v.pr = PrivilegesRequired::None;
  else if (t == "L") v.pr = PrivilegesRequired::Low;
  else if (t == "H") v.pr = PrivilegesRequired::High;
  else throw ParseError("bad PR value " + t);

  t = metric_token(parts[3], "UI");
  if (t == "N") v.ui = UserInteraction::None;
  else if (t == "R") v.ui = UserInteraction::Required;
  else throw ParseError("bad UI value " + t);

  t = metric_token(parts[4], "S");
  if (t == "U") v.scope = Scope::Unchanged;
  else if (t == "C") v.scope = Scope::Changed;
  else throw ParseError("bad S value " + t);

  auto level = [](const std::string& s, const char* name) {
    if (s == "H") return ImpactLevel::High;
    if (s == "L") return ImpactLevel::Low;
    if (s == "N") return ImpactLevel::None;
    throw ParseError(std::string("bad ") + name + " value " + s);
  };
  v.conf = level(metric_token(parts[5], "C"), "C");
  v.integ = level(metric_token(parts[6], "I"), "I");
  v.avail = level(metric_token(parts[7], "A"), "A");
  return v;
}

std::string to_string(const CvssVector& v) {
  auto lv = [](ImpactLevel l) {
    return l == ImpactLevel::High ? "H" : (l == ImpactLevel::Low ? "L" : "N");
  };
  std::string s = "AV:";
  switch (v.av) {
    case AttackVector::Network: s += "N"; break;
    case AttackVector::Adjacent: s += "A"; break;
    case AttackVector::Local: s += "L"; break;
    case AttackVector::Physical: s += "P"; break;
  }
  s += "/AC:";
  s += v.ac == AttackComplexity::Low ? "L" : "H";
  s += "/PR:";
  s += v.pr == PrivilegesRequired::None ? "N" : (v.pr == PrivilegesRequired::Low ? "L" : "H");
  s += "/UI:";
  s += v.ui == UserInteraction::None ? "N" : "R";
  s += "/S:";
  s += v.scope == Scope::Unchanged ? "U" : "C";
  s += "/C:";
  s += lv(v.conf);
  s += "/I:";
  s += lv(v.integ);
  s += "/A:";
  s += lv(v.avail);
  return s;
}

CvssVector default_vector(BusKind kind) {
  if (kind == BusKind::PQ)
    return parse_cvss_vector("AV:N/AC:L/PR:L/UI:N/S:U/C:L/I:L/A:L");
  return parse_cvss_vector("AV:N/AC:H/PR:H/UI:R/S:C/C:H/I:H/A:H");
}

std::vector<NodeScore> score_network(const PowerNetwork& net, ScoringScheme scheme,
                                     const std::map<int, CvssVector>& overrides) {
  for (const auto& [bus, vec] : overrides) {
    bool known = false;
    for (const auto& b : net.buses) known = known || b.id == bus;
    if (!known)
      throw ConfigError("override names bus " + std::to_string(bus) +
                        " which is not in the network");
  }
  std::vector<NodeScore> out;
  out.reserve(net.buses.size());
  for (const auto& b : net.buses) {
    NodeScore ns;
    ns.bus = b.id;
    auto it = overrides.find(b.id);
    if (it != overrides.end()) {
      ns.vec = it->second;
      ns.overridden = true;
    } else {
      ns.vec = default_vector(b.kind);
    }
    ns.exploit = exploitability(ns.vec, scheme);
    ns.imp = impact(ns.vec);
    ns.base = base_score(ns.vec, scheme);
    out.push_back(ns);
  }
  return out;
}

std::map<int, CvssVector> load_vector_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open override file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("override file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("override file must be a JSON object");
  std::map<int, CvssVector> out;
  for (const auto& [key, value] : j.items()) {
    int bus;
    try {
      bus = std::stoi(key);
    } catch (const std::exception&) {
      throw ParseError("override key '" + key + "' is not a bus id");
    }
    out[bus] = parse_cvss_vector(value.get<std::string>());
  }
  return out;
}

}  // namespace gridsec
