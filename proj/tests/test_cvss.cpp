#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <vector>

#include "gridsec/cvss.hpp"
#include "support/nets.hpp"

using namespace gridsec;

TEST_CASE("vector strings parse and print back") {
  std::string s = "AV:A/AC:H/PR:L/UI:R/S:C/C:H/I:N/A:L";
  CvssVector v = parse_cvss_vector(s);
  CHECK(to_string(v) == s);

  CHECK_THROWS_AS(parse_cvss_vector("AV:N/AC:L"), ParseError);
  CHECK_THROWS_AS(parse_cvss_vector("AV:X/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:L"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_cvss_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:L/E:X"), ParseError);
  CHECK_THROWS_AS(parse_cvss_vector("AC:L/AV:N/PR:N/UI:N/S:U/C:L/I:L/A:L"),
                  ParseError);
}

TEST_CASE("default profiles reproduce the reference scores") {
  CvssVector pq = default_vector(BusKind::PQ);
  CvssVector pv = default_vector(BusKind::PV);
  CHECK(to_string(pq) == "AV:N/AC:L/PR:L/UI:N/S:U/C:L/I:L/A:L");
  CHECK(to_string(pv) == "AV:N/AC:H/PR:H/UI:R/S:C/C:H/I:H/A:H");
  CHECK(to_string(default_vector(BusKind::Slack)) == to_string(pv));

  // hand-evaluated: 8.22*0.85*0.77*0.85*0.62 and 8.22*0.85*0.44*0.62*0.50
  CHECK(exploitability(pq, ScoringScheme::Cvss31) == doctest::Approx(2.83525473));
  CHECK(exploitability(pv, ScoringScheme::Cvss31) == doctest::Approx(0.9530268));
  // 6.42*(1-0.78^3) and 7.52*(i-0.029)-3.25*(i-0.02)^15 with i=1-0.44^3
  CHECK(impact(pq) == doctest::Approx(3.37337616));
  CHECK(impact(pv) == doctest::Approx(6.0477304915));
  CHECK(base_score(pq, ScoringScheme::Cvss31) == doctest::Approx(6.20863089));
  CHECK(base_score(pv, ScoringScheme::Cvss31) == doctest::Approx(7.5608178749));
  // the industrial mapping swaps only the exploitability side
  CHECK(exploitability(pq, ScoringScheme::Ivss) == doctest::Approx(4.932));
  CHECK(exploitability(pv, ScoringScheme::Ivss) == doctest::Approx(0.09864));
  CHECK(base_score(pq, ScoringScheme::Ivss) == doctest::Approx(8.30537616));
  CHECK(base_score(pv, ScoringScheme::Ivss) == doctest::Approx(6.6380801309));

  CHECK(base_score(pv, ScoringScheme::Cvss31) >
        base_score(pq, ScoringScheme::Cvss31));
}

TEST_CASE("zero impact forces a zero score") {
  CvssVector v = parse_cvss_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N");
  CHECK(impact(v) == doctest::Approx(0.0));
  CHECK(base_score(v, ScoringScheme::Cvss31) == doctest::Approx(0.0));
  CHECK(base_score(v, ScoringScheme::Ivss) == doctest::Approx(0.0));
}

TEST_CASE("scores saturate at ten") {
  CvssVector v = parse_cvss_vector("AV:N/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H");
  CHECK(base_score(v, ScoringScheme::Cvss31) == doctest::Approx(10.0));
  CHECK(base_score(v, ScoringScheme::Ivss) == doctest::Approx(10.0));
}

namespace {

const char* kAv[] = {"N", "A", "L", "P"};
const char* kAc[] = {"L", "H"};
const char* kPr[] = {"N", "L", "H"};
const char* kUi[] = {"N", "R"};
const char* kSc[] = {"U", "C"};
const char* kCia[] = {"N", "L", "H"};

std::vector<CvssVector> all_vectors() {
  std::vector<CvssVector> out;
  for (auto av : kAv)
    for (auto ac : kAc)
      for (auto pr : kPr)
        for (auto ui : kUi)
          for (auto sc : kSc)
            for (auto c : kCia)
              for (auto i : kCia)
                for (auto a : kCia) {
                  std::string s = std::string("AV:") + av + "/AC:" + ac +
                                  "/PR:" + pr + "/UI:" + ui + "/S:" + sc +
                                  "/C:" + c + "/I:" + i + "/A:" + a;
                  out.push_back(parse_cvss_vector(s));
                }
  return out;
}

// index 0 is the numerically highest level of each sub-metric in both schemes
template <typename Setter>
void check_step_up(const CvssVector& v, ScoringScheme scheme, Setter set,
                   int from, int to, int* failures) {
  CvssVector lower = v, higher = v;
  set(lower, from);
  set(higher, to);
  if (base_score(higher, scheme) < base_score(lower, scheme) - 1e-12) ++(*failures);
}

}  // namespace

TEST_CASE("raising any sub-metric never lowers the score") {
  auto vectors = all_vectors();
  REQUIRE(vectors.size() == 2592);
  int failures = 0;
  for (ScoringScheme scheme : {ScoringScheme::Cvss31, ScoringScheme::Ivss}) {
    for (const auto& v : vectors) {
      for (int k = 1; k < 4; ++k)
        check_step_up(v, scheme, [](CvssVector& x, int i) { x.av = AttackVector(i); },
                      k, k - 1, &failures);
      check_step_up(v, scheme, [](CvssVector& x, int i) { x.ac = AttackComplexity(i); },
                    1, 0, &failures);
      for (int k = 1; k < 3; ++k)
        check_step_up(v, scheme,
                      [](CvssVector& x, int i) { x.pr = PrivilegesRequired(i); }, k,
                      k - 1, &failures);
      check_step_up(v, scheme, [](CvssVector& x, int i) { x.ui = UserInteraction(i); },
                    1, 0, &failures);
      for (int k = 1; k < 3; ++k) {
        check_step_up(v, scheme, [](CvssVector& x, int i) { x.conf = ImpactLevel(i); },
                      k, k - 1, &failures);
        check_step_up(v, scheme, [](CvssVector& x, int i) { x.integ = ImpactLevel(i); },
                      k, k - 1, &failures);
        check_step_up(v, scheme, [](CvssVector& x, int i) { x.avail = ImpactLevel(i); },
                      k, k - 1, &failures);
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("network scoring uses bus kind and honors overrides") {
  PowerNetwork net = support::make_triangle();
  net.buses[2].kind = BusKind::PV;
  net.generators.push_back({3, 0.0, 10.0});
  CaseOptions opts;
  finalize_case(net, opts);

  auto scores = score_network(net, ScoringScheme::Cvss31);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0].base == doctest::Approx(7.5608178749));  // slack
  CHECK(scores[1].base == doctest::Approx(6.20863089));    // load bus
  CHECK(scores[2].base == doctest::Approx(7.5608178749));  // generator bus
  CHECK_FALSE(scores[1].overridden);

  std::map<int, CvssVector> ov;
  ov[2] = parse_cvss_vector("AV:P/AC:H/PR:H/UI:R/S:U/C:L/I:L/A:L");
  auto with = score_network(net, ScoringScheme::Cvss31, ov);
  CHECK(with[1].overridden);
  CHECK(with[1].base < scores[1].base);
  CHECK(with[0].base == doctest::Approx(scores[0].base));
  CHECK(with[2].base == doctest::Approx(scores[2].base));

  ov.clear();
  ov[9] = parse_cvss_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:L");
  CHECK_THROWS_AS(score_network(net, ScoringScheme::Cvss31, ov), ConfigError);
}

TEST_CASE("override files load as bus to vector maps") {
  std::string path = "/tmp/gridsec_test_overrides.json";
  {
    std::ofstream f(path);
    f << R"({"2": "AV:L/AC:H/PR:H/UI:R/S:U/C:L/I:N/A:N"})";
  }
  auto ov = load_vector_overrides(path);
  REQUIRE(ov.size() == 1);
  CHECK(ov.count(2) == 1);
  CHECK(to_string(ov[2]) == "AV:L/AC:H/PR:H/UI:R/S:U/C:L/I:N/A:N");
  std::remove(path.c_str());

  {
    std::ofstream f(path);
    f << R"(["not", "an", "object"])";
  }
  CHECK_THROWS_AS(load_vector_overrides(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("scheme names parse") {
  CHECK(scheme_from_string("cvss") == ScoringScheme::Cvss31);
  CHECK(scheme_from_string("cvss31") == ScoringScheme::Cvss31);
  CHECK(scheme_from_string("cvss3.1") == ScoringScheme::Cvss31);
  CHECK(scheme_from_string("ivss") == ScoringScheme::Ivss);
  CHECK_THROWS_AS(scheme_from_string("nvd"), ConfigError);
}
