#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "gridsec/dcflow.hpp"
#include "gridsec/network.hpp"
#include "support/nets.hpp"

using namespace gridsec;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = std::string("/tmp/gridsec_test_") + name;
  std::ofstream f(path);
  f << text;
  return path;
}

}  // namespace

TEST_CASE("json round trip preserves the network") {
  PowerNetwork net = support::make_triangle();
  std::string path = write_temp("roundtrip.json", serialize_case(net));
  PowerNetwork back = parse_case(path);
  CHECK(back == net);
  std::remove(path.c_str());
}

TEST_CASE("structural validation rejects malformed cases") {
  PowerNetwork net = support::make_triangle();
  CaseOptions opts;

  SUBCASE("two slack buses") {
    net.buses[1].kind = BusKind::Slack;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("no slack bus") {
    net.buses[0].kind = BusKind::PV;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("slack without a generator") {
    net.generators[0].bus = 2;
    net.buses[1].kind = BusKind::PV;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("self loop") {
    net.branches[0].to_bus = net.branches[0].from_bus;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("zero reactance") {
    net.branches[0].reactance_pu = 0.0;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("disconnected") {
    net.buses.push_back({4, BusKind::PQ, 0.0, ""});
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("non-contiguous ids") {
    net.buses[2].id = 9;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
}

TEST_CASE("generators at the same bus merge") {
  PowerNetwork net = support::make_triangle();
  net.buses[2].kind = BusKind::PV;
  net.generators.push_back({3, 10.0, 50.0});
  net.generators.push_back({3, 5.0, 30.0});
  CaseOptions opts;
  finalize_case(net, opts);
  int at3 = 0;
  for (const auto& g : net.generators)
    if (g.bus == 3) {
      ++at3;
      CHECK(g.output_mw == doctest::Approx(15.0));
      CHECK(g.max_mw == doctest::Approx(80.0));
    }
  CHECK(at3 == 1);
}

TEST_CASE("slack rebalances to cover the mismatch") {
  PowerNetwork net = support::make_triangle();
  net.generators[0].output_mw = 17.0;  // wrong on purpose
  CaseOptions opts;
  finalize_case(net, opts);
  CHECK(net.generator_at(1)->output_mw == doctest::Approx(90.0));

  SUBCASE("mismatch is an error when rebalancing is off") {
    net.generators[0].output_mw = 17.0;
    opts.rebalance_slack = false;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
  SUBCASE("dispatch above unit maximum is rejected") {
    net.buses[1].load_mw = 1000.0;  // slack would need more than max_mw
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
}

TEST_CASE("missing ratings fall back to scaled base flow") {
  PowerNetwork net = support::make_triangle();
  net.branches[0].rating_mw = 0.0;
  net.branches[0].rating_assumed = true;
  CaseOptions opts;
  opts.rating_floor_mw = 10.0;
  finalize_case(net, opts);
  // base flow on 1-2 is 60 MW
  CHECK(net.branches[0].rating_mw == doctest::Approx(72.0));
  CHECK(net.branches[0].rating_assumed);

  SUBCASE("floor applies to lightly loaded branches") {
    net.branches[1].rating_mw = 0.0;
    net.branches[1].rating_assumed = true;
    opts.rating_floor_mw = 500.0;
    finalize_case(net, opts);
    CHECK(net.branches[1].rating_mw == doctest::Approx(500.0));
  }
  SUBCASE("explicit nonpositive rating is an error") {
    net.branches[2].rating_mw = -5.0;
    net.branches[2].rating_assumed = false;
    CHECK_THROWS_AS(finalize_case(net, opts), ParseError);
  }
}

TEST_CASE("case file parsing") {
  SUBCASE("null rating marks the branch assumed") {
    std::string path = write_temp("nullrating.json", R"({
      "base_mva": 100.0,
      "buses": [
        {"id": 1, "kind": "Slack", "load_mw": 0.0},
        {"id": 2, "kind": "PQ", "load_mw": 20.0}
      ],
      "generators": [{"bus": 1, "output_mw": 20.0, "max_mw": 100.0}],
      "branches": [{"from": 1, "to": 2, "reactance_pu": 0.1, "rating_mw": null}]
    })");
    PowerNetwork net = parse_case(path);
    CHECK(net.branches[0].rating_assumed);
    CHECK(net.branches[0].rating_mw == doctest::Approx(24.0));
    std::remove(path.c_str());
  }
  SUBCASE("garbage is a parse error") {
    std::string path = write_temp("garbage.json", "{nope");
    CHECK_THROWS_AS(parse_case(path), ParseError);
    std::remove(path.c_str());
  }
  SUBCASE("missing file") { CHECK_THROWS(parse_case("/nonexistent/x.json")); }
}

TEST_CASE("matrix-format import") {
  std::string path = write_temp("mini.m", R"(
function mpc = mini
mpc.baseMVA = 100;
mpc.bus = [
  10 3 0   0 0 0 1 1 0 132 1 1.06 0.94;
  20 1 30  0 0 0 1 1 0 132 1 1.06 0.94;
  40 1 -12 0 0 0 1 1 0 132 1 1.06 0.94;
];
mpc.gen = [
  10 42 0 10 0 1 100 1 200 0;
  20 99 0 10 0 1 100 0 100 0;
];
mpc.branch = [
  10 20 0 0.1 0 50 50 50 0 0 1 -360 360;
  20 40 0 0.1 0 50 50 50 0 0 1 -360 360;
  10 40 0 0.1 0  0  0  0 0 0 1 -360 360;
  10 20 0 0.1 0 50 50 50 0 0 0 -360 360;
];
)");
  CaseOptions opts;
  PowerNetwork net = import_matrix_case(path, opts);
  std::remove(path.c_str());

  CHECK(net.bus_count() == 3);
  CHECK(net.buses[0].name == "bus 10");  // renumbered, original kept as name
  CHECK(net.buses[2].name == "bus 40");
  CHECK(net.branch_count() == 3);  // status-0 row dropped
  // negative Pd became a generator
  CHECK(net.generator_at(3) != nullptr);
  CHECK(net.generator_at(3)->output_mw == doctest::Approx(12.0));
  CHECK(net.buses[2].load_mw == doctest::Approx(0.0));
  // status-0 generator dropped, slack picked up the balance
  CHECK(net.generator_at(2) == nullptr);
  CHECK(net.generator_at(1)->output_mw == doctest::Approx(18.0));
  // rateA of zero means no rating given
  CHECK(net.branches[2].rating_assumed);
}

TEST_CASE("bundled cases load with expected totals") {
  PowerNetwork n30 = parse_case(std::string(GRIDSEC_DATA_DIR) + "/ieee30.json");
  CHECK(n30.bus_count() == 30);
  CHECK(n30.branch_count() == 41);
  CHECK(n30.generators.size() == 6);
  CHECK(n30.total_load_mw() == doctest::Approx(283.4));
  CHECK(n30.total_generation_mw() == doctest::Approx(283.4));
  CHECK(n30.buses[n30.slack_index()].id == 1);

  PowerNetwork n39 = parse_case(std::string(GRIDSEC_DATA_DIR) + "/ieee39.json");
  CHECK(n39.bus_count() == 39);
  CHECK(n39.branch_count() == 46);
  CHECK(n39.generators.size() == 10);
  CHECK(n39.total_load_mw() == doctest::Approx(6254.23));
  CHECK(n39.total_generation_mw() == doctest::Approx(6254.23));
  CHECK(n39.buses[n39.slack_index()].id == 31);
}
