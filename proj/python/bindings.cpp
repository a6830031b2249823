#include "twf/config.hpp"
#include "twf/continuation.hpp"
#include "twf/diagnostics.hpp"
#include "twf/errors.hpp"
#include "twf/oracle.hpp"
#include "twf/run.hpp"
#include "twf/scheme.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace twf;

namespace {

// Nodal field as a (nz + 1, nx + 1) array, row 0 at the bottom.
Eigen::MatrixXd as_grid(const Field& f)
{
    const Index nx = f.shape().nx;
    const Index nz = f.shape().nz;
    Eigen::MatrixXd out(nz + 1, nx + 1);
    for (Index j = 0; j <= nz; ++j)
        for (Index i = 0; i <= nx; ++i)
            out(j, i) = f[j * (nx + 1) + i];
    return out;
}

py::dict record_dict(const SweepRecord& r)
{
    py::dict d;
    d["c"] = r.c;
    d["converged"] = r.converged;
    d["iters"] = r.iters;
    d["G1"] = r.G1;
    d["G2"] = r.G2;
    d["type"] = std::string(to_string(r.type));
    d["h"] = r.h;
    d["reaches_top"] = r.reaches_top;
    d["p_star"] = r.p_star;
    d["max_s"] = r.max_s;
    d["last_update"] = r.last_update;
    d["error"] = r.error;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Travelling-wave finger solver";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BracketError>(m, "BracketError", PyExc_ValueError);
    py::register_exception<UndefinedResult>(m, "UndefinedResult", PyExc_ArithmeticError);
    py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

    py::enum_<FluxConvention>(m, "FluxConvention")
        .value("Total", FluxConvention::Total)
        .value("PerLength", FluxConvention::PerLength);
    py::enum_<PressureSolver>(m, "PressureSolver")
        .value("Direct", PressureSolver::Direct)
        .value("ReusedFactor", PressureSolver::ReusedFactor);

    py::class_<Params>(m, "Params")
        .def(py::init<>())
        .def_readwrite("L", &Params::L)
        .def_readwrite("H", &Params::H)
        .def_readwrite("nx", &Params::nx)
        .def_readwrite("nz", &Params::nz)
        .def_readwrite("g", &Params::g)
        .def_readwrite("tau", &Params::tau)
        .def_readwrite("c", &Params::c)
        .def_readwrite("F_inf", &Params::F_inf)
        .def_readwrite("kappa", &Params::kappa)
        .def_readwrite("a", &Params::a)
        .def_readwrite("pc_shift", &Params::pc_shift)
        .def_readwrite("s0_base", &Params::s0_base)
        .def_readwrite("delta", &Params::delta)
        .def_readwrite("d", &Params::d)
        .def_readwrite("y_c", &Params::y_c)
        .def_readwrite("M", &Params::M)
        .def_readwrite("epsilon", &Params::epsilon)
        .def_readwrite("tol_fp", &Params::tol_fp)
        .def_readwrite("max_iter", &Params::max_iter)
        .def_readwrite("rtol_lin", &Params::rtol_lin)
        .def_readwrite("p_init", &Params::p_init)
        .def_readwrite("s_init", &Params::s_init)
        .def_readwrite("flux_convention", &Params::flux_convention)
        .def_readwrite("pressure_solver", &Params::pressure_solver)
        .def_readwrite("refactor_after", &Params::refactor_after)
        .def_readwrite("accel_depth", &Params::accel_depth)
        .def_readwrite("accel_start", &Params::accel_start)
        .def("validate", &Params::validate)
        .def("warnings", &Params::warnings);

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("s", [](const Solution& s) { return as_grid(s.s); })
        .def_property_readonly("p", [](const Solution& s) { return as_grid(s.p); })
        .def_readonly("p_star", &Solution::p_star)
        .def_readonly("iters", &Solution::iters)
        .def_readonly("converged", &Solution::converged)
        .def_readonly("residual_history", &Solution::residual_history)
        .def_readonly("params", &Solution::params);

    m.def("fixed_point_solve", &fixed_point_solve, py::arg("params"),
          py::call_guard<py::gil_scoped_release>());

    m.def("eval_G1", &eval_G1, py::arg("solution"), py::arg("params"));
    m.def("eval_G2", &eval_G2, py::arg("solution"), py::arg("params"));
    m.def("eval_G_general", &eval_G_general, py::arg("solution"), py::arg("params"),
          py::arg("s_star") = py::none());
    m.def(
        "classify",
        [](const Solution& sol, const Params& p, std::optional<double> thr, int margin) {
            const Classification c = classify(sol, p, thr, margin);
            py::dict d;
            d["type"] = std::string(to_string(c.type));
            d["h"] = c.h;
            d["h_row"] = c.h_row;
            d["reaches_top"] = c.reaches_top;
            d["G2"] = c.G2;
            d["threshold"] = c.threshold;
            return d;
        },
        py::arg("solution"), py::arg("params"), py::arg("dz_threshold") = py::none(),
        py::arg("margin_rows") = 2);

    m.def(
        "sweep_c",
        [](const Params& p, const std::vector<double>& cs, bool warm) {
            SweepResult r;
            {
                py::gil_scoped_release release;
                r = sweep_c(p, cs, warm);
            }
            py::list out;
            for (const SweepRecord& rec : r.records)
                out.append(record_dict(rec));
            return out;
        },
        py::arg("params"), py::arg("c_values"), py::arg("warm_start") = false);

    m.def(
        "find_wave_speed",
        [](const Params& p, double lo, double hi, double tol) {
            WaveSpeedResult r;
            {
                py::gil_scoped_release release;
                r = find_wave_speed(p, lo, hi, tol);
            }
            py::dict d;
            d["c_bar"] = r.c_bar;
            d["c_lo"] = r.c_lo;
            d["c_hi"] = r.c_hi;
            d["G1_lo"] = r.G1_lo;
            d["G1_hi"] = r.G1_hi;
            py::list recs;
            for (const SweepRecord& rec : r.records)
                recs.append(record_dict(rec));
            d["records"] = recs;
            return d;
        },
        py::arg("params"), py::arg("c_lo"), py::arg("c_hi"), py::arg("tol_c"));

    m.def(
        "bisect",
        [](const std::function<double(double)>& f, double lo, double hi, double tol) {
            const BisectionResult r = bisect(f, lo, hi, tol);
            py::dict d;
            d["root"] = r.root;
            d["lo"] = r.lo;
            d["hi"] = r.hi;
            d["value_lo"] = r.value_lo;
            d["value_hi"] = r.value_hi;
            d["steps"] = r.steps.size();
            return d;
        },
        py::arg("f"), py::arg("lo"), py::arg("hi"), py::arg("tol"));

    m.def(
        "flux_profile",
        [](const Solution& sol, const Params& p) {
            const FluxProfile f = flux_profile(sol, p);
            py::dict d;
            d["z"] = f.z;
            d["value"] = f.value;
            d["bottom"] = f.bottom;
            d["top"] = f.top;
            d["mean"] = f.mean;
            d["relative_deviation"] = f.relative_deviation();
            return d;
        },
        py::arg("solution"), py::arg("params"));
    m.def("free_boundary", &free_boundary, py::arg("solution"), py::arg("params"),
          py::arg("threshold") = py::none());
    m.def("s_star", &s_star, py::arg("solution"), py::arg("params"));
    m.def("g_F", &g_F, py::arg("solution"), py::arg("params"));
    m.def("c_mass_balance", &c_mass_balance, py::arg("solution"), py::arg("params"),
          py::arg("s_ref") = py::none());

    m.def(
        "ode_transport",
        [](const Solution& sol, const Params& p) {
            TravellingWaveSolver solver(p);
            return as_grid(ode_transport(solver, sol.p));
        },
        py::arg("solution"), py::arg("params"));

    m.def(
        "parse_config",
        [](const std::string& text) { return to_json(parse_config(text)).dump(); },
        py::arg("text"), "Validated effective configuration as a JSON string.");

    m.def(
        "params_from_config",
        [](const std::string& text) { return parse_config(text).params; }, py::arg("text"));

    m.def(
        "run",
        [](const std::string& text, const std::string& out_dir,
           const std::vector<std::string>& overrides) {
            RunConfig cfg = parse_config(text);
            for (const std::string& o : overrides)
                apply_override(cfg, o);
            RunOutcome r;
            {
                py::gil_scoped_release release;
                r = run(cfg, out_dir);
            }
            return py::make_tuple(r.exit_code, r.summary.dump());
        },
        py::arg("config"), py::arg("out_dir"), py::arg("overrides") = std::vector<std::string>{});
}
