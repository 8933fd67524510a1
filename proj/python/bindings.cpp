#include <optional>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oritube/characterization.hpp"
#include "oritube/error.hpp"
#include "oritube/export.hpp"
#include "oritube/folding.hpp"
#include "oritube/geometry.hpp"
#include "oritube/material.hpp"
#include "oritube/structural.hpp"

namespace py = pybind11;
using namespace oritube;

namespace {

Eigen::MatrixX3d stack(const std::vector<Eigen::Vector3d>& v) {
    Eigen::MatrixX3d m(v.size(), 3);
    for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = v[i];
    return m;
}

std::vector<Eigen::Vector2d> rows2(const Eigen::MatrixX2d& m) {
    std::vector<Eigen::Vector2d> v;
    for (Eigen::Index i = 0; i < m.rows(); ++i) v.emplace_back(m.row(i));
    return v;
}

py::bytes stl_bytes(const QuadMesh& mesh, bool closed) {
    std::ostringstream out;
    if (closed) export_closed_stl(mesh, out);
    else export_stl(mesh, out);
    return py::bytes(out.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Origami tube actuator toolkit";

    // the module keeps the type alive, so a borrowed pointer is enough in the translator
    static PyObject* error_type = py::exception<Error>(m, "OritubeError", PyExc_RuntimeError).ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error_type)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type, exc.ptr());
        }
    });

    // geometry
    py::class_<EdgeGroup>(m, "EdgeGroup")
        .def_readonly("slope", &EdgeGroup::slope)
        .def_readonly("edges", &EdgeGroup::edges)
        .def_readonly("sign", &EdgeGroup::sign)
        .def_readonly("length_positive", &EdgeGroup::length_positive)
        .def_readonly("length_negative", &EdgeGroup::length_negative);
    py::class_<EdgeGroupReport>(m, "EdgeGroupReport")
        .def_readonly("groups", &EdgeGroupReport::groups)
        .def_readonly("admissible", &EdgeGroupReport::admissible)
        .def_readonly("violations", &EdgeGroupReport::violations);
    m.def(
        "check_admissible",
        [](const Eigen::MatrixX2d& vertices, double length_tol, double angle_tol) {
            return check_admissible(CrossSection(rows2(vertices)), length_tol, angle_tol);
        },
        py::arg("vertices"), py::arg("length_tol") = kDefaultLengthTol, py::arg("angle_tol") = kDefaultAngleTol,
        "Slope-group report for a polygon given as an (n, 2) array in mm.");
    m.def(
        "quad_section",
        [](double a, double b, double theta1_deg, double theta2_deg) {
            const auto cs = make_quad_section(a, b, theta1_deg, theta2_deg);
            Eigen::MatrixX2d out(cs.size(), 2);
            for (std::size_t i = 0; i < cs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cs.vertices()[i];
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("theta1_deg"), py::arg("theta2_deg"));

    py::class_<TubeGeometry>(m, "Tube")
        .def_property_readonly("vertices", [](const TubeGeometry& t) { return stack(t.mesh.vertices); })
        .def_property_readonly("faces", [](const TubeGeometry& t) { return t.mesh.faces; })
        .def_property_readonly("n_sides", &TubeGeometry::n_sides)
        .def_property_readonly("n_rings", &TubeGeometry::n_rings)
        .def_readonly("deployed_length", &TubeGeometry::deployed_length)
        .def("crease_kinds",
             [](const TubeGeometry& t) {
                 std::vector<std::string> k;
                 for (const auto& c : t.creases) k.emplace_back(to_string(c.kind));
                 return k;
             })
        .def("stl", [](const TubeGeometry& t, bool closed) { return stl_bytes(t.mesh, closed); },
             py::arg("closed") = true)
        .def("pattern_svg", [](const TubeGeometry& t) {
            std::ostringstream out;
            export_svg_pattern(unroll_crease_pattern(t), out);
            return out.str();
        });
    m.def(
        "generate_tube",
        [](const Eigen::MatrixX2d& section, double alpha_deg, double unit_length, int n_units) {
            TubeSpec spec{CrossSection(rows2(section)), alpha_deg, unit_length, n_units};
            return generate_tube(spec);
        },
        py::arg("section"), py::arg("alpha_deg") = 45.0, py::arg("unit_length") = 15.0, py::arg("n_units") = 1);

    // folding
    py::class_<FoldedState>(m, "FoldedState")
        .def_readonly("t", &FoldedState::t)
        .def_property_readonly("vertices", [](const FoldedState& s) { return stack(s.mesh.vertices); })
        .def_readonly("axial_length", &FoldedState::axial_length)
        .def_readonly("transverse_height", &FoldedState::transverse_height)
        .def_readonly("enclosed_volume", &FoldedState::enclosed_volume)
        .def_readonly("volume_from_hull", &FoldedState::volume_from_hull)
        .def_readonly("driving_dihedral", &FoldedState::driving_dihedral)
        .def("stl", [](const FoldedState& s, bool closed) { return stl_bytes(s.mesh, closed); },
             py::arg("closed") = true);
    m.def(
        "fold",
        [](const TubeGeometry& tube, double t, bool continuation) {
            FoldOptions opt;
            if (continuation) opt.method = FoldMethod::Continuation;
            return fold_configuration(tube, t, opt);
        },
        py::arg("tube"), py::arg("t"), py::arg("continuation") = false);
    m.def("fold_sweep", [](const TubeGeometry& tube, int n_steps) { return fold_sweep(tube, n_steps); },
          py::arg("tube"), py::arg("n_steps") = 21);
    m.def(
        "rigidity_residual",
        [](const TubeGeometry& tube, const FoldedState& s) {
            const auto r = rigidity_residual(tube, s);
            return py::make_tuple(r.edge, r.planarity);
        },
        "(edge, planarity) residuals in mm.");

    // material
    py::class_<OgdenParams>(m, "OgdenParams")
        .def(py::init<double, double, double>(), py::arg("mu1"), py::arg("alpha1"), py::arg("d1") = 0.0)
        .def_readwrite("mu1", &OgdenParams::mu1)
        .def_readwrite("alpha1", &OgdenParams::alpha1)
        .def_readwrite("d1", &OgdenParams::d1)
        .def("__repr__", [](const OgdenParams& p) {
            std::ostringstream o;
            o << "OgdenParams(mu1=" << p.mu1 << ", alpha1=" << p.alpha1 << ", d1=" << p.d1 << ")";
            return o.str();
        });
    m.attr("RESIN") = kResinOgden;
    m.def("uniaxial_stress", &uniaxial_stress, py::arg("params"), py::arg("stretch"));
    m.def("ogden_energy", &ogden_energy, py::arg("params"), py::arg("l1"), py::arg("l2"), py::arg("l3"));
    py::class_<FitResult>(m, "FitResult")
        .def_readonly("params", &FitResult::params)
        .def_readonly("rms_pa", &FitResult::rms_pa)
        .def_readonly("r2", &FitResult::r2)
        .def_readonly("iterations", &FitResult::iterations)
        .def_readonly("n_points", &FitResult::n_points);
    m.def(
        "fit_ogden",
        [](const std::vector<double>& strain, const std::vector<double>& stress, std::uint64_t seed) {
            StressStrainCurve c;
            c.strain = strain;
            c.stress = stress;
            FitOptions opt;
            opt.seed = seed;
            return fit_ogden(c, {1e5, 2.0, 0.0}, opt);
        },
        py::arg("strain"), py::arg("stress_pa"), py::arg("seed") = 1);
    m.def(
        "load_utm_csv",
        [](const std::filesystem::path& path, double width, double thickness, double gauge) {
            const auto c = load_utm_csv(path, {width, thickness, gauge, 60.0});
            return py::make_tuple(c.strain, c.stress);
        },
        py::arg("path"), py::arg("width_mm") = 6.0, py::arg("thickness_mm") = 3.2, py::arg("gauge_length_mm") = 25.0,
        "(strain, nominal stress Pa) from a tensile-test CSV.");

    // structural
    m.def(
        "tensile_curve",
        [](const TubeGeometry& tube, const std::vector<double>& displacements, double thickness, double crease_scale,
           bool quarter) {
            const auto model = build_bar_hinge(tube, kResinOgden, thickness, crease_scale);
            const auto sc = quarter ? quarter_scenario(tube, model) : end_ring_scenario(tube);
            std::vector<std::pair<double, double>> out;
            for (const auto& p : tensile_sweep(model, sc, displacements)) out.emplace_back(p.displacement, p.force);
            return out;
        },
        py::arg("tube"), py::arg("displacements_mm"), py::arg("thickness_mm") = 1.0, py::arg("crease_scale") = 0.01,
        py::arg("quarter") = false, "[(displacement mm, force N)] for an end-ring pull.");

    // characterization
    py::class_<ExperimentRecord>(m, "ExperimentRecord")
        .def_readonly("source", &ExperimentRecord::source)
        .def_readonly("time", &ExperimentRecord::time)
        .def_readonly("pressure", &ExperimentRecord::pressure)
        .def_readonly("displacement", &ExperimentRecord::displacement)
        .def_readonly("force", &ExperimentRecord::force);
    m.def("load_experiment_csv", py::overload_cast<const std::filesystem::path&>(&load_experiment_csv));
    py::class_<ForceSummary>(m, "ForceSummary")
        .def_readonly("max_force", &ForceSummary::max_force)
        .def_readonly("pressure_at_max", &ForceSummary::pressure_at_max)
        .def_readonly("time_at_max", &ForceSummary::time_at_max);
    m.def("force_summary", &force_summary);
    py::class_<StepMetrics>(m, "StepMetrics")
        .def_readonly("actuation_s", &StepMetrics::actuation_s)
        .def_readonly("hold_s", &StepMetrics::hold_s)
        .def_readonly("release_s", &StepMetrics::release_s)
        .def_readonly("cycle_s", &StepMetrics::cycle_s)
        .def_readonly("start_s", &StepMetrics::start_s)
        .def_readonly("plateau_mm", &StepMetrics::plateau_mm);
    m.def("step_response_metrics", &step_response_metrics);
    m.def("data_dir", [] { return default_catalog_path().parent_path(); });
    m.def(
        "materials",
        [](const std::optional<std::filesystem::path>& path) {
            std::vector<py::dict> out;
            for (const auto& e : read_catalog(path ? *path : default_catalog_path())) {
                py::dict d;
                d["name"] = e.name;
                d["shore_a"] = format_range(e.shore_a);
                d["tear_kN_per_m"] = format_range(e.tear_kn_per_m);
                d["tensile_MPa"] = format_range(e.tensile_mpa);
                d["elongation_pct"] = format_range(e.elongation_pct);
                d["viscosity_mPa_s"] = format_range(e.viscosity_mpa_s);
                d["problems"] = e.problems;
                out.push_back(d);
            }
            return out;
        },
        py::arg("path") = py::none(), "Catalog entries as dicts of strings; NA marks a missing value.");
}
