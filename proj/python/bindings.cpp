#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "chris/at.hpp"
#include "chris/commands.hpp"
#include "chris/engine.hpp"
#include "chris/tcn.hpp"
#include "chris/zoo.hpp"

namespace py = pybind11;
using namespace chris;

namespace {

// Enums cross the boundary as their display names.
std::string name(ModelKind k) { return std::string(to_string(k)); }
std::string name(Execution e) { return std::string(to_string(e)); }
std::string name(Device d) { return std::string(to_string(d)); }

zoo::Configuration make_config(const std::string& simple, const std::string& complex, int threshold,
                               const std::string& execution, double avg_mae_bpm, double avg_watch_mj,
                               double offload_fraction) {
  zoo::Configuration c{parse_model_kind(simple), parse_model_kind(complex), threshold, parse_execution(execution)};
  c.avg_mae_bpm = avg_mae_bpm;
  c.avg_watch_mj = avg_watch_mj;
  c.offload_fraction = offload_fraction;
  return c;
}

}  // namespace

PYBIND11_MODULE(_chris, m) {
  m.doc() = "Heart-rate model zoo, offloading decision engine and simulator";

  static py::exception<Error> error(m, "ChrisError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error((std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<zoo::Configuration>(m, "Configuration")
      .def(py::init(&make_config), py::arg("simple"), py::arg("complex"), py::arg("threshold"),
           py::arg("execution") = "Local", py::arg("avg_mae_bpm") = 0.0, py::arg("avg_watch_mj") = 0.0,
           py::arg("offload_fraction") = 0.0)
      .def_property_readonly("simple", [](const zoo::Configuration& c) { return name(c.simple); })
      .def_property_readonly("complex", [](const zoo::Configuration& c) { return name(c.complex); })
      .def_readonly("threshold", &zoo::Configuration::threshold)
      .def_property_readonly("execution", [](const zoo::Configuration& c) { return name(c.execution); })
      .def_readwrite("avg_mae_bpm", &zoo::Configuration::avg_mae_bpm)
      .def_readwrite("avg_watch_mj", &zoo::Configuration::avg_watch_mj)
      .def_readwrite("offload_fraction", &zoo::Configuration::offload_fraction)
      .def_property_readonly("label", &zoo::Configuration::label)
      .def("__repr__", [](const zoo::Configuration& c) {
        std::ostringstream s;
        s << "<Configuration " << c.label() << " mae=" << c.avg_mae_bpm << " mj=" << c.avg_watch_mj << ">";
        return s.str();
      });

  m.def(
      "synth_window",
      [](double hr, int activity, std::uint64_t seed) {
        const auto w = signal::synth_window(hr, ActivityId(activity), seed);
        py::dict d;
        d["ppg"] = w.ppg;
        d["accel"] = w.accel;
        d["activity"] = w.activity.value();
        d["hr_ref"] = w.hr_ref;
        return d;
      },
      py::arg("hr_bpm"), py::arg("activity"), py::arg("seed"));

  m.def(
      "at_predict", [](const std::vector<double>& ppg) { return predictors::at_predict(ppg).bpm; }, py::arg("ppg"));

  m.def(
      "count_ops",
      [](const std::string& model) {
        const auto ops = predictors::count_ops(predictors::architecture_for(parse_model_kind(model)));
        return py::make_tuple(ops.params, ops.macs);
      },
      py::arg("model"));

  m.def(
      "profiles_json", [](const std::string& set) { return energy::profiles_to_json(energy::profiles_by_name(set)); },
      py::arg("name") = "deployment");

  m.def(
      "enumerate",
      [](const std::vector<std::string>& models, const std::string& profiles, bool include_hybrid) {
        std::vector<ModelKind> kinds;
        for (const auto& s : models) kinds.push_back(parse_model_kind(s));
        return zoo::enumerate(kinds, energy::profiles_by_name(profiles), include_hybrid);
      },
      py::arg("models") = std::vector<std::string>{"AT", "TimePPG-Small", "TimePPG-Big"},
      py::arg("profiles") = "deployment", py::arg("include_hybrid") = true);

  m.def(
      "pareto_filter", [](const std::vector<zoo::Configuration>& rows) { return zoo::pareto_filter(rows).rows; },
      py::arg("configs"));

  m.def(
      "feasible",
      [](const std::vector<zoo::Configuration>& rows, const std::string& status) {
        return engine::feasible({rows, "", ""}, parse_connection_status(status)).rows;
      },
      py::arg("rows"), py::arg("status"));

  m.def(
      "select",
      [](const std::vector<zoo::Configuration>& rows, const std::string& constraint) {
        const auto s = engine::select(rows, engine::parse_constraint(constraint));
        return py::make_tuple(s.config, s.soft_violation);
      },
      py::arg("rows"), py::arg("constraint"));

  m.def(
      "dispatch",
      [](const zoo::Configuration& c, int activity) {
        const auto d = engine::dispatch(c, ActivityId(activity));
        return py::make_tuple(name(d.model), name(d.device));
      },
      py::arg("config"), py::arg("activity"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
