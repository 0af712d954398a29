// python face of the core library; heavy payloads cross as JSON strings

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "gridsec/common.hpp"
#include "gridsec/config.hpp"
#include "gridsec/contingency.hpp"
#include "gridsec/cvss.hpp"
#include "gridsec/dcflow.hpp"
#include "gridsec/network.hpp"
#include "gridsec/report.hpp"

namespace py = pybind11;

namespace {

using namespace gridsec;

py::dict pair_to_dict(const OutagePair& p) {
  py::dict d;
  d["x"] = p.x;
  d["y"] = p.y;
  d["islanding"] = p.islanding;
  d["severity"] = p.severity;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "grid contingency screening and attack path assessment";
  m.attr("__version__") = kVersion;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ComputeError>(m, "ComputeError", PyExc_RuntimeError);

  py::class_<PowerNetwork>(m, "Network")
      .def_property_readonly("bus_count", &PowerNetwork::bus_count)
      .def_property_readonly("branch_count", &PowerNetwork::branch_count)
      .def_property_readonly("generator_count",
                             [](const PowerNetwork& n) { return n.generators.size(); })
      .def_property_readonly("total_load_mw", &PowerNetwork::total_load_mw)
      .def_property_readonly("total_generation_mw", &PowerNetwork::total_generation_mw)
      .def("to_json", [](const PowerNetwork& n) { return serialize_case(n); })
      .def("__repr__", [](const PowerNetwork& n) {
        return "<Network " + std::to_string(n.bus_count()) + " buses, " +
               std::to_string(n.branch_count()) + " branches>";
      });

  m.def("load_case", [](const std::string& path) { return parse_case(path); },
        py::arg("path"), "read a case file in the native JSON format");
  m.def("parse_case_text", [](const std::string& text) { return parse_case_text(text); },
        py::arg("text"));
  m.def("import_matrix_case",
        [](const std::string& path) { return import_matrix_case(path); },
        py::arg("path"), "read a MATLAB-style mpc case file");

  m.def("dc_flows", [](const PowerNetwork& net) { return dc_power_flow(net).mw; },
        py::arg("net"), "signed branch flows in MW");

  m.def("n2_scan",
        [](const PowerNetwork& net) {
          N2Result r = prune_n2(net, dc_power_flow(net));
          py::dict d;
          d["pairs_total"] = r.pairs_total;
          d["pairs_pruned"] = r.pairs_pruned;
          d["prune_iterations"] = r.prune_iterations;
          py::list violating, islanding;
          for (const auto& p : r.violating) violating.append(pair_to_dict(p));
          for (const auto& p : r.islanding) islanding.append(pair_to_dict(p));
          d["violating"] = violating;
          d["islanding"] = islanding;
          return d;
        },
        py::arg("net"), "double-outage screening with the pruning fixed point");

  m.def("base_score",
        [](const std::string& vector, const std::string& scheme) {
          return base_score(parse_cvss_vector(vector), scheme_from_string(scheme));
        },
        py::arg("vector"), py::arg("scheme") = "cvss");

  m.def("score_network",
        [](const PowerNetwork& net, const std::string& scheme) {
          py::list out;
          for (const auto& s : score_network(net, scheme_from_string(scheme))) {
            py::dict d;
            d["bus"] = s.bus;
            d["vector"] = to_string(s.vec);
            d["exploitability"] = s.exploit;
            d["impact"] = s.imp;
            d["base"] = s.base;
            out.append(d);
          }
          return out;
        },
        py::arg("net"), py::arg("scheme") = "cvss");

  m.def("assess_json",
        [](const std::string& config_json) {
          RunConfig cfg = config_from_json(nlohmann::json::parse(config_json));
          return run_assessment(cfg).report.dump();
        },
        py::arg("config_json"),
        "full pipeline from a JSON config string; returns the report as JSON");
}
