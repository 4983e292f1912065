#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>

#include "bilag/errors.hpp"
#include "bilag/expr.hpp"
#include "bilag/runner.hpp"
#include "bilag/scene.hpp"
#include "bilag/torus.hpp"

namespace py = pybind11;
using namespace bilag;

namespace {

RunFlags flags_from_kwargs(std::optional<std::uint64_t> seed, std::optional<int> samples,
                           std::optional<double> tol, long iters, std::optional<double> tmax,
                           std::optional<int> grid) {
    RunFlags f;
    f.seed = seed;
    f.samples = samples;
    f.tol = tol;
    f.iters = iters;
    f.tmax = tmax;
    f.grid = grid;
    return f;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "bi-Lagrangian structure verifier and Cherry-flow toolkit";

    // translators run newest-first, so the base class goes in first and the
    // derived kinds take precedence
    py::register_exception<Error>(m, "ToolkitError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "SceneParseError", PyExc_ValueError);
    py::register_exception<BindError>(m, "SceneBindError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainFailure", PyExc_ValueError);
    py::register_exception<CheckError>(m, "CheckFailure", PyExc_RuntimeError);

    m.def("commands", [] { return command_names(); },
          "names of the available subcommands, in documentation order");

    m.def(
        "run",
        [](const std::string& command, const std::string& scene_path,
           std::optional<std::uint64_t> seed, std::optional<int> samples,
           std::optional<double> tol, long iters, std::optional<double> tmax,
           std::optional<int> grid, const std::string& out) {
            Scene scene = load_scene(scene_path);
            RunResult r = run_command(
                command, scene, flags_from_kwargs(seed, samples, tol, iters, tmax, grid));
            if (!out.empty()) write_outputs(r, out);
            return py::make_tuple(r.exit_code, r.report.dump(2), r.csv);
        },
        py::arg("command"), py::arg("scene"), py::kw_only(), py::arg("seed") = py::none(),
        py::arg("samples") = py::none(), py::arg("tol") = py::none(),
        py::arg("iters") = 10000, py::arg("tmax") = py::none(),
        py::arg("grid") = py::none(), py::arg("out") = std::string(),
        "Run one subcommand against a scene file.\n"
        "Returns (exit_code, report_json, csv_table); csv_table is empty for\n"
        "commands that emit no table. When out is given the report (and the\n"
        "table, if any) are also written to disk.");

    m.def(
        "evaluate",
        [](const std::string& expr_text, const std::vector<std::string>& variables,
           const std::vector<double>& point) {
            CompiledExpr ce(parse(expr_text), variables);
            return ce(point);
        },
        py::arg("expr"), py::arg("variables"), py::arg("point"),
        "Evaluate an expression at a point; variables name the slots of point.");

    m.def(
        "derivatives",
        [](const std::string& expr_text, const std::vector<std::string>& variables,
           const std::vector<double>& point, int order) {
            CompiledExpr ce(parse(expr_text), variables);
            Jet j = ce.jet(point, order);
            std::vector<double> out;
            for (int k = 0; k < j.size(); ++k) out.push_back(j.coeffs()[k]);
            return out;
        },
        py::arg("expr"), py::arg("variables"), py::arg("point"), py::arg("order"),
        "Taylor coefficients (graded-lexicographic order) of the expression\n"
        "about the point, up to the requested order.");

    m.def(
        "rotation_number",
        [](double alpha, long iters) {
            RotationNumberEstimate est = rotation_number(rigid_rotation(alpha), iters);
            return py::make_tuple(est.value, est.enclosure);
        },
        py::arg("alpha"), py::arg("iters") = 10000,
        "Rotation number of the rigid rotation by alpha, with its enclosure "
        "width (a numerical identity check).");
}
