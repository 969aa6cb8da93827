#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heatlocus/commands.hpp"
#include "heatlocus/heat.hpp"
#include "heatlocus/io.hpp"
#include "heatlocus/laplace.hpp"
#include "heatlocus/singularity.hpp"

namespace py = pybind11;
using namespace heatlocus;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package converts it.
std::string text(const json& j) { return dump_json(j, 0); }

std::vector<GeodesicClassification> classifications(const std::vector<int>& ms) {
  std::vector<GeodesicClassification> out;
  for (int m : ms) out.push_back({m, 1.0, 1.0});
  return out;
}

}  // namespace

PYBIND11_MODULE(_heatlocus, m) {
  m.doc() = "Small-time heat-kernel asymptotics at conjugate and cut points";

  static py::exception<Error> error(m, "HeatlocusError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("kind") = to_string(e.kind());
      exc.attr("exit_status") = exit_status(e.kind());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("command_names", &command_names);

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config, std::optional<std::uint64_t> seed, bool verify) {
        RunOptions options;
        options.seed = seed;
        options.verify = verify;
        CommandOutput out;
        {
          const json cfg = parse_config(config);
          py::gil_scoped_release release;
          out = run_command(name, cfg, options);
        }
        py::dict d;
        d["primary"] = out.primary;
        d["format"] = out.format;
        d["sidecar"] = out.sidecar ? py::object(py::str(*out.sidecar)) : py::object(py::none());
        d["status"] = out.status;
        d["data"] = text(out.data);
        return d;
      },
      py::arg("name"), py::arg("config"), py::arg("seed") = py::none(), py::arg("verify") = false);

  m.def(
      "predict",
      [](int n, const std::vector<int>& ms, bool constants) {
        return text(to_json(predict(n, classifications(ms), constants)));
      },
      py::arg("n"), py::arg("m_list"), py::arg("constants_available") = true);

  m.def(
      "predict_bounds", [](int n, int r) { return text(to_json(predict_bounds(n, r))); }, py::arg("n"), py::arg("r"));

  m.def(
      "expand",
      [](const std::vector<int>& m_list, double f0, const std::vector<double>& f_second, double g0) {
        DiagonalPhase phase;
        phase.g0 = g0;
        phase.m_list = m_list;
        phase.validate();
        std::vector<double> d2 = f_second;
        if (d2.empty()) d2.assign(m_list.size() - static_cast<std::size_t>(phase.ell_index()) + 1, 0.0);
        const ExpansionResult e = expand(f0, d2, phase);
        return text({{"power", e.power.str()},
                     {"c0_term", e.c0_term},
                     {"c1_term", e.c1_term},
                     {"c1_power", e.c1_power.str()},
                     {"exp_factor_rate", e.exp_factor_rate}});
      },
      py::arg("m_list"), py::arg("f0") = 1.0, py::arg("f_second_derivs") = std::vector<double>{}, py::arg("g0") = 0.0);

  m.def(
      "leading_constant", &leading_constant_Ci, py::arg("F_zi"), py::arg("c0_left"), py::arg("c0_right"), py::arg("n"),
      py::arg("m"));

  m.def("catalog_labels", &catalog_labels);

  m.def(
      "classify_catalog", [](const std::string& label, int n) { return text(to_json(classify(catalog(label, n)))); },
      py::arg("label"), py::arg("n"));
}
