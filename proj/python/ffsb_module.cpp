#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ffsb/collocation.hpp"
#include "ffsb/propagation.hpp"
#include "ffsb/report.hpp"
#include "ffsb/scenario.hpp"
#include "ffsb/shaping.hpp"

namespace py = pybind11;
using namespace ffsb;

namespace {

// Trajectory columns as a dict of equal-length lists.
py::dict profile_dict(const TrajectoryProfile& p) {
    std::vector<double> t, r, theta, rdot, thetadot, ta, alpha;
    for (std::size_t k = 0; k < p.samples.size(); ++k) {
        const auto& s = p.samples[k];
        t.push_back(s.t);
        r.push_back(s.r);
        theta.push_back(s.theta);
        rdot.push_back(s.rdot);
        thetadot.push_back(s.thetadot);
        ta.push_back(p.thrust[k].ta);
        alpha.push_back(p.thrust[k].alpha);
    }
    py::dict d;
    d["t"] = t;
    d["r"] = r;
    d["theta"] = theta;
    d["rdot"] = rdot;
    d["thetadot"] = thetadot;
    d["ta"] = ta;
    d["alpha"] = alpha;
    return d;
}

std::string summary_text(const Summary& s) {
    std::ostringstream os;
    s.write(os);
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite Fourier series shape-based and minimum-time low-thrust transfers";
    m.attr("__version__") = FFSB_VERSION;

    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<ReportError>(m, "ReportError", PyExc_IOError);

    py::enum_<ObjectiveMode>(m, "ObjectiveMode")
        .value("none", ObjectiveMode::none)
        .value("tof", ObjectiveMode::tof)
        .value("delta_v", ObjectiveMode::delta_v);
    py::enum_<FinalAngleMode>(m, "FinalAngleMode")
        .value("free", FinalAngleMode::free)
        .value("fixed", FinalAngleMode::fixed)
        .value("rendezvous_sync", FinalAngleMode::rendezvous_sync);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readwrite("name", &ScenarioConfig::name)
        .def_readwrite("n_r", &ScenarioConfig::n_r)
        .def_readwrite("n_theta", &ScenarioConfig::n_theta)
        .def_readwrite("dp", &ScenarioConfig::dp)
        .def_readwrite("ta_max", &ScenarioConfig::ta_max)
        .def_readwrite("omega", &ScenarioConfig::omega)
        .def_readwrite("tof_0", &ScenarioConfig::tof_0)
        .def_readwrite("objective_mode", &ScenarioConfig::objective_mode)
        .def_readwrite("final_angle_mode", &ScenarioConfig::final_angle_mode)
        .def_property_readonly("tu_hours", [](const ScenarioConfig& c) { return c.units.tu_hours(); })
        .def("tof_hours", &ScenarioConfig::tof_hours)
        .def("validate", &ScenarioConfig::validate)
        .def("__str__", &format_scenario);

    m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("name") = "");

    py::class_<NlpResult>(m, "NlpResult")
        .def_property_readonly("status", [](const NlpResult& r) { return std::string(to_string(r.status)); })
        .def_readonly("iterations", &NlpResult::iterations)
        .def_readonly("outer_iterations", &NlpResult::outer_iterations)
        .def_readonly("max_violation", &NlpResult::max_violation)
        .def_readonly("x_star", &NlpResult::x_star)
        .def("converged", &NlpResult::converged);

    py::class_<ShapeSolution>(m, "ShapeSolution")
        .def_readonly("free", &ShapeSolution::free)
        .def_readonly("coeffs_r", &ShapeSolution::coeffs_r)
        .def_readonly("coeffs_theta", &ShapeSolution::coeffs_theta)
        .def_readonly("tof", &ShapeSolution::tof)
        .def_readonly("theta_f", &ShapeSolution::theta_f)
        .def_readonly("fsq", &ShapeSolution::fsq)
        .def_readonly("delta_v", &ShapeSolution::delta_v)
        .def_readonly("objective", &ShapeSolution::objective)
        .def_readonly("max_abs_ta", &ShapeSolution::max_abs_ta)
        .def_readonly("nlp", &ShapeSolution::nlp)
        .def_readonly("elapsed_s", &ShapeSolution::elapsed_s)
        .def_property_readonly("profile", [](const ShapeSolution& s) { return profile_dict(s.profile); });

    m.def(
        "solve",
        [](const ScenarioConfig& cfg, std::optional<Eigen::VectorXd> warm_start) {
            ShapeOptions o;
            o.warm_start = std::move(warm_start);
            py::gil_scoped_release release;
            return solve(cfg, o);
        },
        py::arg("config"), py::arg("warm_start") = py::none());
    m.def("objective", py::overload_cast<const Eigen::VectorXd&, const ScenarioConfig&>(&objective), py::arg("x"),
          py::arg("config"));
    m.def("residual_vector", py::overload_cast<const Eigen::VectorXd&, const ScenarioConfig&>(&residual_vector),
          py::arg("x"), py::arg("config"));

    py::class_<SweepRecord>(m, "SweepRecord")
        .def_readonly("omega", &SweepRecord::omega)
        .def_readonly("fsq", &SweepRecord::fsq)
        .def_readonly("tof_hours", &SweepRecord::tof_hours)
        .def_readonly("delta_v", &SweepRecord::delta_v)
        .def_readonly("status", &SweepRecord::status);
    m.def(
        "sweep",
        [](const ScenarioConfig& cfg, const std::vector<double>& omegas, bool parallel) {
            SweepOptions o;
            o.parallel = parallel;
            py::gil_scoped_release release;
            return sweep(cfg, omegas, o);
        },
        py::arg("config"), py::arg("omegas") = default_sweep_weights(), py::arg("parallel") = false);
    m.def("spearman", &spearman, py::arg("a"), py::arg("b"));

    py::class_<PropagationReport>(m, "PropagationReport")
        .def_readonly("final_radius_error_rel", &PropagationReport::final_radius_error_rel)
        .def_readonly("final_angle_error_deg", &PropagationReport::final_angle_error_deg)
        .def_readonly("max_path_deviation", &PropagationReport::max_path_deviation)
        .def_readonly("steps_taken", &PropagationReport::steps_taken)
        .def_property_readonly("feasible", [](const PropagationReport& r) { return is_feasible(r); });
    m.def(
        "integrate_open_loop",
        [](const ShapeSolution& sol, const ScenarioConfig& cfg) {
            py::gil_scoped_release release;
            return integrate_open_loop(sol, cfg);
        },
        py::arg("solution"), py::arg("config"));

    py::class_<OptimalSolution>(m, "OptimalSolution")
        .def_readonly("tof_hours", &OptimalSolution::tof_hours)
        .def_readonly("defect_norm", &OptimalSolution::defect_norm)
        .def_readonly("boundary_error", &OptimalSolution::boundary_error)
        .def_readonly("nlp", &OptimalSolution::nlp)
        .def_readonly("elapsed_s", &OptimalSolution::elapsed_s)
        .def_property_readonly("saturation_fraction", [](const OptimalSolution& s) { return saturation_fraction(s); })
        .def_property_readonly("off_fraction", [](const OptimalSolution& s) { return off_fraction(s); })
        .def_property_readonly("profile", [](const OptimalSolution& s) { return profile_dict(s.profile); })
        .def("converged", &OptimalSolution::converged);
    m.def(
        "solve_min_time",
        [](const ScenarioConfig& cfg, int segments) {
            CollocationOptions o;
            o.segments = segments;
            py::gil_scoped_release release;
            return solve_min_time(cfg, o);
        },
        py::arg("config"), py::arg("segments") = kDefaultSegments);

    m.def("summary", [](const ShapeSolution& s, const ScenarioConfig& c) { return summary_text(summarize(s, c)); });
    m.def("summary", [](const OptimalSolution& s, const ScenarioConfig& c) { return summary_text(summarize(s, c)); });
}
