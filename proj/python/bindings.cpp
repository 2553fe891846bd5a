// Python access to the free Stein computations. Results cross the boundary as
// the same JSON documents the command-line tool writes; the Python package
// decodes them into dictionaries.

#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "freestein/closedform.hpp"
#include "freestein/model_io.hpp"
#include "freestein/poly_io.hpp"
#include "freestein/report.hpp"
#include "freestein/stein.hpp"

namespace py = pybind11;
using namespace freestein;
using nlohmann::json;

namespace {

struct PyModel {
  ModelPtr model;
};

SolverOptions options(int threads, double cutoff) {
  SolverOptions o;
  o.threads = threads;
  o.cutoff = cutoff;
  return o;
}

DegreeScheme scheme_of(const PyModel& m, int d_xi, int d_proj) {
  DegreeScheme s = d_proj > 0 ? DegreeScheme{d_xi, d_proj} : DegreeScheme::with_default_proj(d_xi);
  s.validate(*m.model->system());
  return s;
}

const MeasureModel& as_measure(const PyModel& m) {
  const auto* mm = dynamic_cast<const MeasureModel*>(m.model.get());
  if (!mm) throw std::invalid_argument("expected a one-variable measure model");
  return *mm;
}

std::string doc(const std::string& command, const json& payload) { return document(command, payload).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Free Stein discrepancy, irregularity and dimension";
  m.attr("SCHEMA") = kSchema;

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DegreeCapError>(m, "DegreeCapError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("n", [](const PyModel& p) { return p.model->size(); })
      .def_property_readonly("kind", [](const PyModel& p) { return p.model->kind(); })
      .def(
          "trace",
          [](const PyModel& p, const std::vector<int>& letters) {
            for (int l : letters)
              if (l < 1 || l > p.model->size()) throw std::invalid_argument("generator index out of range");
            std::vector<int> zero_based(letters);
            for (int& l : zero_based) --l;
            return p.model->trace(Word::of_letters(zero_based));
          },
          py::arg("letters"), "Trace of the word t_{i1} ... t_{ik} (1-based indices)")
      .def("__repr__", [](const PyModel& p) {
        return "<freestein.Model kind=" + p.model->kind() + " n=" + std::to_string(p.model->size()) + ">";
      });

  m.def("load_model", [](const std::string& path) { return PyModel{load_model(path)}; }, py::arg("path"));
  m.def(
      "model_from_json", [](const std::string& text) { return PyModel{model_from_json(json::parse(text))}; },
      py::arg("spec"));

  m.def(
      "parse_poly",
      [](const PyModel& p, const std::string& text) {
        return json(to_json(parse_poly(text, p.model->system()))).dump();
      },
      py::arg("model"), py::arg("text"));

  m.def(
      "discrepancy",
      [](const PyModel& p, const std::string& xi, int d_xi, int d_proj, int threads, double cutoff) {
        py::gil_scoped_release release;
        auto rep = discrepancy(*p.model, parse_poly(xi, p.model->system()), scheme_of(p, d_xi, d_proj),
                               options(threads, cutoff));
        return doc("discrepancy", to_json(rep));
      },
      py::arg("model"), py::arg("xi"), py::arg("d_xi") = 1, py::arg("d_proj") = 0, py::arg("threads") = 1,
      py::arg("cutoff") = 1e-10);

  m.def(
      "irregularity",
      [](const PyModel& p, int d_xi, int d_proj, int threads, double cutoff) {
        py::gil_scoped_release release;
        auto rep = irregularity_estimate(*p.model, scheme_of(p, d_xi, d_proj), options(threads, cutoff));
        return doc("irregularity", to_json(rep));
      },
      py::arg("model"), py::arg("d_xi") = 1, py::arg("d_proj") = 0, py::arg("threads") = 1,
      py::arg("cutoff") = 1e-10);

  m.def(
      "bounded",
      [](const PyModel& p, double radius, int d_xi, int d_proj, int threads, double cutoff) {
        py::gil_scoped_release release;
        auto rep = irregularity_bounded(*p.model, scheme_of(p, d_xi, d_proj), radius, options(threads, cutoff));
        return doc("bounded", to_json(rep));
      },
      py::arg("model"), py::arg("radius"), py::arg("d_xi") = 1, py::arg("d_proj") = 0, py::arg("threads") = 1,
      py::arg("cutoff") = 1e-10);

  m.def(
      "sigma_exact",
      [](const PyModel& p, int d, double cutoff) {
        py::gil_scoped_release release;
        return doc("sigma-exact", to_json(sigma_exact_fd(*p.model, d, options(1, cutoff))));
      },
      py::arg("model"), py::arg("d"), py::arg("cutoff") = 1e-10);

  m.def(
      "alpha",
      [](const std::vector<std::pair<double, double>>& sweep, double zero_tolerance) {
        return doc("alpha", to_json(alpha_estimate(sweep, zero_tolerance)));
      },
      py::arg("sweep"), py::arg("zero_tolerance") = 1e-8);

  m.def(
      "one_var",
      [](const PyModel& p) { return doc("closed-form one-var", to_json(one_var_sigma(as_measure(p)))); },
      py::arg("model"));

  m.def(
      "fd_sigma",
      [](const std::vector<std::pair<int, std::string>>& blocks) {
        std::vector<FdBlock> fd;
        for (const auto& [k, w] : blocks) fd.push_back({k, rational_from_json(json(w), "weight")});
        return doc("closed-form fd", {{"sigma", rational_json(fd_sigma(fd))}});
      },
      py::arg("blocks"), "Blocks as [(k, \"p/q\"), ...]");

  m.def(
      "finite_group_sigma",
      [](long order) { return doc("closed-form finite-group", {{"sigma", rational_json(finite_group_sigma(order))}}); },
      py::arg("order"));

  m.def(
      "radulescu",
      [](const std::string& spec) {
        return doc("closed-form radulescu", to_json(radulescu(radulescu_from_json(json::parse(spec)))));
      },
      py::arg("spec"));

  m.def(
      "graph",
      [](const std::string& spec) {
        return doc("closed-form graph", to_json(graph_sigma(graph_from_json(json::parse(spec)))));
      },
      py::arg("spec"));

  m.def(
      "eps_kernel",
      [](const PyModel& p, double eps, int grid_points, double tol) {
        const auto& mm = as_measure(p);
        py::gil_scoped_release release;
        return doc("closed-form eps-kernel", to_json(eps_kernel(mm, eps, grid_points, tol)));
      },
      py::arg("model"), py::arg("eps"), py::arg("grid_points") = 33, py::arg("tol") = 1e-10);

  m.def(
      "log_energy",
      [](const PyModel& p, double tol) {
        const auto& mm = as_measure(p);
        py::gil_scoped_release release;
        return doc("closed-form log-energy", to_json(log_energy(mm, tol)));
      },
      py::arg("model"), py::arg("tol") = 1e-10);

  m.def(
      "staircase",
      [](int level) { return doc("closed-form staircase", to_json(staircase_log_energy(level))); },
      py::arg("level"));
}
