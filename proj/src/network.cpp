#include "gridsec/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "gridsec/dcflow.hpp"

namespace gridsec {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(BusKind kind) {
  switch (kind) {
    case BusKind::Slack: return "Slack";
    case BusKind::PV: return "PV";
    case BusKind::PQ: return "PQ";
  }
  throw ParseError("unknown bus kind");
}

BusKind bus_kind_from_string(const std::string& s) {
  if (s == "Slack") return BusKind::Slack;
  if (s == "PV") return BusKind::PV;
  if (s == "PQ") return BusKind::PQ;
  throw ParseError("bad bus kind '" + s + "' (expected Slack, PV or PQ)");
}

int PowerNetwork::bus_index(int bus_id) const {
  if (buses.empty()) throw ParseError("network has no buses");
  int idx = bus_id - buses.front().id;
  if (idx < 0 || idx >= bus_count() || buses[idx].id != bus_id)
    throw ParseError("unknown bus id " + std::to_string(bus_id));
  return idx;
}

int PowerNetwork::slack_index() const {
  for (int i = 0; i < bus_count(); ++i)
    if (buses[i].kind == BusKind::Slack) return i;
  throw ParseError("network has no slack bus");
}

const Generator* PowerNetwork::generator_at(int bus_id) const {
  for (const auto& g : generators)
    if (g.bus == bus_id) return &g;
  return nullptr;
}

Generator* PowerNetwork::generator_at(int bus_id) {
  return const_cast<Generator*>(std::as_const(*this).generator_at(bus_id));
}

double PowerNetwork::total_load_mw() const {
  return std::accumulate(buses.begin(), buses.end(), 0.0,
                         [](double s, const Bus& b) { return s + b.load_mw; });
}

double PowerNetwork::total_generation_mw() const {
  return std::accumulate(generators.begin(), generators.end(), 0.0,
                         [](double s, const Generator& g) { return s + g.output_mw; });
}

std::vector<std::vector<int>> PowerNetwork::adjacency() const {
  std::vector<std::vector<int>> adj(buses.size());
  for (const auto& br : branches) {
    int f = bus_index(br.from_bus);
    int t = bus_index(br.to_bus);
    adj[f].push_back(t);
    adj[t].push_back(f);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

bool PowerNetwork::connected() const {
  if (buses.empty()) return false;
  auto adj = adjacency();
  std::vector<char> seen(buses.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == bus_count();
}

bool operator==(const PowerNetwork& a, const PowerNetwork& b) {
  if (a.base_mva != b.base_mva) return false;
  if (a.buses.size() != b.buses.size() || a.generators.size() != b.generators.size() ||
      a.branches.size() != b.branches.size())
    return false;
  for (size_t i = 0; i < a.buses.size(); ++i) {
    const Bus& x = a.buses[i];
    const Bus& y = b.buses[i];
    if (x.id != y.id || x.kind != y.kind || x.load_mw != y.load_mw || x.name != y.name)
      return false;
  }
  for (size_t i = 0; i < a.generators.size(); ++i) {
    const Generator& x = a.generators[i];
    const Generator& y = b.generators[i];
    if (x.bus != y.bus || x.output_mw != y.output_mw || x.max_mw != y.max_mw) return false;
  }
  for (size_t i = 0; i < a.branches.size(); ++i) {
    const Branch& x = a.branches[i];
    const Branch& y = b.branches[i];
    if (x.id != y.id || x.from_bus != y.from_bus || x.to_bus != y.to_bus ||
        x.reactance_pu != y.reactance_pu || x.rating_mw != y.rating_mw ||
        x.rating_assumed != y.rating_assumed)
      return false;
  }
  return true;
}

namespace {

void check_structure(const PowerNetwork& net) {
  if (net.base_mva <= 0.0) throw ParseError("base_mva must be positive");
  if (net.buses.empty()) throw ParseError("case has no buses");
  for (size_t i = 0; i < net.buses.size(); ++i) {
    const Bus& b = net.buses[i];
    if (b.id != net.buses.front().id + static_cast<int>(i))
      throw ParseError("bus ids must be contiguous and sorted; gap at id " +
                       std::to_string(b.id));
    if (b.load_mw < 0.0)
      throw ParseError("bus " + std::to_string(b.id) + " has negative load");
  }
  int slacks = 0;
  for (const auto& b : net.buses)
    if (b.kind == BusKind::Slack) ++slacks;
  if (slacks != 1)
    throw ParseError("case must have exactly one slack bus, found " +
                     std::to_string(slacks));

  std::vector<char> has_gen(net.buses.size(), 0);
  for (const auto& g : net.generators) {
    int idx = net.bus_index(g.bus);
    if (has_gen[idx])
      throw ParseError("bus " + std::to_string(g.bus) + " has multiple generators");
    has_gen[idx] = 1;
    if (g.max_mw < 0.0)
      throw ParseError("generator at bus " + std::to_string(g.bus) +
                       " has negative max_mw");
  }
  if (!has_gen[net.slack_index()])
    throw ParseError("slack bus has no generator");

  for (const auto& br : net.branches) {
    net.bus_index(br.from_bus);
    net.bus_index(br.to_bus);
    if (br.from_bus == br.to_bus)
      throw ParseError("branch " + std::to_string(br.id) + " is a self-loop");
    if (br.reactance_pu == 0.0)
      throw ParseError("branch " + std::to_string(br.id) + " has zero reactance");
  }
  if (!net.connected()) throw ParseError("network is not connected");
}

void rebalance_slack(PowerNetwork& net) {
  int slack_id = net.buses[net.slack_index()].id;
  Generator* slack_gen = net.generator_at(slack_id);
  double others = 0.0;
  for (const auto& g : net.generators)
    if (g.bus != slack_id) others += g.output_mw;
  slack_gen->output_mw = net.total_load_mw() - others;
}

void check_dispatch(const PowerNetwork& net) {
  for (const auto& g : net.generators) {
    if (g.output_mw < -1e-9)
      throw ParseError("generator at bus " + std::to_string(g.bus) +
                       " has negative output (" + std::to_string(g.output_mw) + " MW)");
    if (g.output_mw > g.max_mw + 1e-9)
      throw ParseError("generator at bus " + std::to_string(g.bus) +
                       " exceeds its max output (" + std::to_string(g.output_mw) +
                       " > " + std::to_string(g.max_mw) + " MW)");
  }
  double mismatch = net.total_generation_mw() - net.total_load_mw();
  if (std::abs(mismatch) / net.base_mva > 1e-9)
    throw ParseError("generation does not match load, mismatch " +
                     std::to_string(mismatch) + " MW");
}

void fill_missing_ratings(PowerNetwork& net, const CaseOptions& opts) {
  bool any_missing = false;
  for (const auto& br : net.branches)
    if (br.rating_assumed) any_missing = true;
  if (!any_missing) {
    for (const auto& br : net.branches)
      if (br.rating_mw <= 0.0)
        throw ParseError("branch " + std::to_string(br.id) + " has nonpositive rating");
    return;
  }
  BranchFlows flows = dc_power_flow(net);
  for (size_t i = 0; i < net.branches.size(); ++i) {
    Branch& br = net.branches[i];
    if (br.rating_assumed)
      br.rating_mw = std::max(1.2 * std::abs(flows.mw[i]), opts.rating_floor_mw);
    else if (br.rating_mw <= 0.0)
      throw ParseError("branch " + std::to_string(br.id) + " has nonpositive rating");
  }
}

}  // namespace

void finalize_case(PowerNetwork& net, const CaseOptions& opts) {
  std::sort(net.buses.begin(), net.buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });

  // merge duplicate generator rows onto their bus
  std::map<int, Generator> merged;
  for (const auto& g : net.generators) {
    auto [it, fresh] = merged.emplace(g.bus, g);
    if (!fresh) {
      it->second.output_mw += g.output_mw;
      it->second.max_mw += g.max_mw;
    }
  }
  net.generators.clear();
  for (const auto& [bus, g] : merged) net.generators.push_back(g);

  for (size_t i = 0; i < net.branches.size(); ++i)
    net.branches[i].id = static_cast<int>(i);

  check_structure(net);
  if (opts.rebalance_slack) rebalance_slack(net);
  check_dispatch(net);
  fill_missing_ratings(net, opts);
}

void validate(const PowerNetwork& net) {
  check_structure(net);
  check_dispatch(net);
  for (const auto& br : net.branches)
    if (br.rating_mw <= 0.0)
      throw ParseError("branch " + std::to_string(br.id) + " has nonpositive rating");
}

PowerNetwork parse_case_text(const std::string& text, const CaseOptions& opts) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("case is not valid JSON: ") + e.what());
  }
  PowerNetwork net;
  try {
    net.base_mva = j.value("base_mva", 100.0);
    if (!j.contains("buses") || !j.contains("branches"))
      throw ParseError("case needs 'buses' and 'branches' arrays");
    for (const auto& jb : j.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.kind = bus_kind_from_string(jb.at("kind").get<std::string>());
      b.load_mw = jb.value("load_mw", 0.0);
      b.name = jb.value("name", std::string{});
      net.buses.push_back(b);
    }
    for (const auto& jg : j.value("generators", json::array())) {
      Generator g;
      g.bus = jg.at("bus").get<int>();
      g.output_mw = jg.at("output_mw").get<double>();
      g.max_mw = jg.at("max_mw").get<double>();
      net.generators.push_back(g);
    }
    for (const auto& jb : j.at("branches")) {
      Branch br;
      br.from_bus = jb.at("from").get<int>();
      br.to_bus = jb.at("to").get<int>();
      br.reactance_pu = jb.at("reactance_pu").get<double>();
      if (jb.contains("rating_mw") && !jb.at("rating_mw").is_null()) {
        br.rating_mw = jb.at("rating_mw").get<double>();
        br.rating_assumed = jb.value("rating_assumed", false);
      } else {
        br.rating_assumed = true;
      }
      net.branches.push_back(br);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed case: ") + e.what());
  }
  finalize_case(net, opts);
  return net;
}

PowerNetwork parse_case(const std::string& path, const CaseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case_text(buf.str(), opts);
}

std::string serialize_case(const PowerNetwork& net) {
  ordered_json j;
  j["base_mva"] = net.base_mva;
  j["buses"] = ordered_json::array();
  for (const auto& b : net.buses) {
    ordered_json jb;
    jb["id"] = b.id;
    jb["kind"] = to_string(b.kind);
    jb["load_mw"] = b.load_mw;
    if (!b.name.empty()) jb["name"] = b.name;
    j["buses"].push_back(jb);
  }
  j["generators"] = ordered_json::array();
  for (const auto& g : net.generators) {
    ordered_json jg;
    jg["bus"] = g.bus;
    jg["output_mw"] = g.output_mw;
    jg["max_mw"] = g.max_mw;
    j["generators"].push_back(jg);
  }
  j["branches"] = ordered_json::array();
  for (const auto& br : net.branches) {
    ordered_json jb;
    jb["from"] = br.from_bus;
    jb["to"] = br.to_bus;
    jb["reactance_pu"] = br.reactance_pu;
    jb["rating_mw"] = br.rating_mw;
    if (br.rating_assumed) jb["rating_assumed"] = true;
    j["branches"].push_back(jb);
  }
  return j.dump(2) + "\n";
}

void write_case(const PowerNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write case file " + path);
  out << serialize_case(net);
}

namespace {

// pulls "name = [ rows ];" matrix blocks out of MATLAB-style text
std::vector<std::vector<double>> read_matrix_block(const std::string& text,
                                                   const std::string& name) {
  size_t pos = text.find(name + " = [");
  if (pos == std::string::npos) pos = text.find(name + " =[");
  if (pos == std::string::npos) pos = text.find(name + "=[");
  if (pos == std::string::npos)
    throw ParseError("matrix case is missing block '" + name + "'");
  size_t open = text.find('[', pos);
  size_t close = text.find(']', open);
  if (close == std::string::npos)
    throw ParseError("unterminated block '" + name + "'");
  std::string body = text.substr(open + 1, close - open - 1);

  std::vector<std::vector<double>> rows;
  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto cut = line.find('%'); cut != std::string::npos) line.erase(cut);
    for (char& c : line)
      if (c == ';' || c == ',') c = ' ';
    std::istringstream fields(line);
    std::vector<double> row;
    double v;
    while (fields >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

double read_scalar(const std::string& text, const std::string& name, double fallback) {
  size_t pos = text.find(name);
  if (pos == std::string::npos) return fallback;
  size_t eq = text.find('=', pos);
  if (eq == std::string::npos) return fallback;
  try {
    return std::stod(text.substr(eq + 1));
  } catch (const std::exception&) {
    return fallback;
  }
}

}  // namespace

PowerNetwork import_matrix_case(const std::string& path, const CaseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix case " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  auto bus_rows = read_matrix_block(text, "mpc.bus");
  auto gen_rows = read_matrix_block(text, "mpc.gen");
  auto branch_rows = read_matrix_block(text, "mpc.branch");

  PowerNetwork net;
  net.base_mva = read_scalar(text, "mpc.baseMVA", 100.0);

  std::map<int, int> renumber;  // original id -> 1-based new id
  for (const auto& row : bus_rows) {
    if (row.size() < 3) throw ParseError("bus row has fewer than 3 columns");
    renumber[static_cast<int>(row[0])] = 0;
  }
  if (renumber.size() != bus_rows.size())
    throw ParseError("duplicate bus ids in matrix case");
  int next_id = 1;
  bool contiguous = true;
  {
    int expect = renumber.begin()->first;
    for (auto& [orig, fresh] : renumber) {
      if (orig != expect++) contiguous = false;
      fresh = next_id++;
    }
  }

  for (const auto& row : bus_rows) {
    Bus b;
    int orig = static_cast<int>(row[0]);
    b.id = renumber[orig];
    int type = static_cast<int>(row[1]);
    switch (type) {
      case 1: b.kind = BusKind::PQ; break;
      case 2: b.kind = BusKind::PV; break;
      case 3: b.kind = BusKind::Slack; break;
      case 4: throw ParseError("bus " + std::to_string(orig) + " is isolated");
      default:
        throw ParseError("bus " + std::to_string(orig) + " has unknown type " +
                         std::to_string(type));
    }
    double pd = row[2];
    if (pd < 0.0) {
      net.generators.push_back({b.id, -pd, -pd});
      pd = 0.0;
    }
    b.load_mw = pd;
    if (!contiguous) b.name = "bus " + std::to_string(orig);
    net.buses.push_back(b);
  }

  for (const auto& row : gen_rows) {
    if (row.size() < 9) throw ParseError("gen row has fewer than 9 columns");
    int status = static_cast<int>(row[7]);
    if (status <= 0) continue;
    auto it = renumber.find(static_cast<int>(row[0]));
    if (it == renumber.end())
      throw ParseError("generator references unknown bus " +
                       std::to_string(static_cast<int>(row[0])));
    Generator g;
    g.bus = it->second;
    g.output_mw = row[1];
    g.max_mw = row[8];
    net.generators.push_back(g);
  }

  for (const auto& row : branch_rows) {
    if (row.size() < 6) throw ParseError("branch row has fewer than 6 columns");
    if (row.size() >= 11 && static_cast<int>(row[10]) == 0) continue;
    auto from = renumber.find(static_cast<int>(row[0]));
    auto to = renumber.find(static_cast<int>(row[1]));
    if (from == renumber.end() || to == renumber.end())
      throw ParseError("branch references unknown bus");
    Branch br;
    br.from_bus = from->second;
    br.to_bus = to->second;
    br.reactance_pu = row[3];
    double rate_a = row[5];
    if (rate_a > 0.0)
      br.rating_mw = rate_a;
    else
      br.rating_assumed = true;
    net.branches.push_back(br);
  }

  finalize_case(net, opts);
  return net;
}

}  // namespace gridsec
