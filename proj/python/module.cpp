#include "deltashell/analysis.hpp"
#include "deltashell/errors.hpp"
#include "deltashell/experiment.hpp"
#include "deltashell/io.hpp"
#include "deltashell/poles.hpp"
#include "deltashell/propagator.hpp"
#include "deltashell/tables.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace deltashell;

namespace {

ModelParams params(double lambda, double mass, double well_width, double hbar)
{
    ModelParams p{lambda, mass, well_width, hbar};
    p.validate();
    return p;
}

py::array_t<double> array(const std::vector<double>& v)
{
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict pole_dict(const Pole& q)
{
    py::dict d;
    d["index"] = q.index;
    d["momentum"] = q.momentum;
    d["energy"] = q.energy;
    d["width"] = q.width;
    d["lifetime"] = q.lifetime;
    d["q_value"] = q.q_value;
    d["residual"] = q.residual;
    d["certified"] = q.certified;
    return d;
}

py::dict fit_dict(const FitResult& f)
{
    py::dict d;
    d["kind"] = f.kind == FitKind::exponential ? "exponential" : "power_law";
    d["parameter"] = f.parameter;
    d["amplitude"] = f.amplitude;
    d["uncertainty"] = f.uncertainty;
    d["t_lo"] = f.t_lo;
    d["t_hi"] = f.t_hi;
    d["residual_rms"] = f.residual_rms;
    d["points"] = f.points;
    return d;
}

py::dict series_dict(const SurvivalSeries& s)
{
    py::dict d;
    d["t"] = array(s.times);
    d["p_total"] = array(s.p_total);
    d["p_bg"] = array(s.p_bg);
    d["p_poles"] = array(s.p_poles);
    d["p_interf"] = array(s.p_interf);
    d["err_est"] = array(s.err_est);
    d["pole_count"] = s.pole_count;
    return d;
}

PropagatorConfig propagator_config(int grid_intervals, const std::string& rule, double abs_tol, int pole_count)
{
    PropagatorConfig c;
    c.grid_intervals = grid_intervals;
    if (rule == "trapezoid")
        c.rule = SpatialRule::trapezoid;
    else if (rule == "simpson")
        c.rule = SpatialRule::simpson;
    else
        throw DomainError("rule must be 'trapezoid' or 'simpson'");
    c.quadrature.abs_tol = abs_tol;
    c.poles.pole_count = pole_count;
    return c;
}

Normalization normalization(const std::string& s)
{
    if (s == "peak")
        return Normalization::peak;
    if (s == "first")
        return Normalization::first;
    throw DomainError("normalization must be 'peak' or 'first'");
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Delta-shell decay model: poles, survival probability, fits, experiment comparison.";
    m.attr("__version__") = version();

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());

    m.def(
        "characteristic_time",
        [](double lambda, double mass, double well_width, double hbar) {
            return characteristic_time(params(lambda, mass, well_width, hbar));
        },
        py::arg("lambda_"), py::arg("mass") = 1.0, py::arg("well_width") = 1.0, py::arg("hbar") = 1.0);

    m.def(
        "find_poles",
        [](double lambda, int n, double mass, double well_width, double hbar) {
            py::list out;
            for (const auto& q : find_poles(params(lambda, mass, well_width, hbar), n))
                out.append(pole_dict(q));
            return out;
        },
        py::arg("lambda_"), py::arg("n"), py::arg("mass") = 1.0, py::arg("well_width") = 1.0, py::arg("hbar") = 1.0);

    m.def(
        "survival_series",
        [](double lambda, const std::vector<double>& times, int state, int grid_intervals, const std::string& rule,
           double abs_tol, int pole_count, int jobs) {
            const auto cfg = propagator_config(grid_intervals, rule, abs_tol, pole_count);
            SurvivalSeries s;
            {
                py::gil_scoped_release release;
                s = compute_survival_series(params(lambda, 1.0, 1.0, 1.0), InitialState{state}, times, cfg, jobs);
            }
            return series_dict(s);
        },
        py::arg("lambda_"), py::arg("times"), py::arg("state") = 1, py::arg("grid_intervals") = 100,
        py::arg("rule") = "trapezoid", py::arg("abs_tol") = 1e-8, py::arg("pole_count") = 0, py::arg("jobs") = 1,
        "Survival probability and its decomposition at the given reduced times (m = a = hbar = 1).");

    m.def(
        "wavefunction",
        [](double lambda, const std::vector<double>& x, double t, int state, const std::string& method) {
            Propagator prop(params(lambda, 1.0, 1.0, 1.0), InitialState{state});
            if (method == "direct")
                return prop.direct(x, t);
            if (method == "background")
                return prop.background(x, t);
            if (method == "poles")
                return prop.pole_sum(x, t);
            if (method == "contour") {
                auto b = prop.background(x, t);
                const auto q = prop.pole_sum(x, t);
                for (std::size_t i = 0; i < b.size(); ++i)
                    b[i] += q[i];
                return b;
            }
            throw DomainError("method must be direct, contour, background or poles");
        },
        py::arg("lambda_"), py::arg("x"), py::arg("t"), py::arg("state") = 1, py::arg("method") = "contour");

    m.def(
        "fit_exponential", [](const std::vector<double>& t, const std::vector<double>& p) {
            return fit_dict(fit_exponential(t, p));
        },
        py::arg("t"), py::arg("p"));
    m.def(
        "fit_powerlaw", [](const std::vector<double>& t, const std::vector<double>& p) {
            return fit_dict(fit_powerlaw(t, p));
        },
        py::arg("t"), py::arg("p"));

    m.def(
        "regime_report",
        [](double lambda, double t_min, double t_max, int points_per_decade, int jobs) {
            RegimeRunResult r;
            {
                py::gil_scoped_release release;
                r = run_regime({lambda, t_min, t_max, points_per_decade}, InitialState{1}, {}, {}, {}, jobs);
            }
            const auto& rep = r.report;
            py::dict d;
            d["lambda"] = rep.lambda;
            d["tau0"] = rep.tau0;
            d["exponential"] = fit_dict(rep.exponential);
            d["power_law"] = rep.power_law_found ? py::object(fit_dict(rep.power_law)) : py::none();
            d["tau_fit_over_tau0"] = rep.tau_fit / rep.tau0;
            d["tau_pole_over_tau0"] = rep.tau_pole / rep.tau0;
            d["discrepancy_pct"] = rep.discrepancy_pct;
            d["q_value"] = rep.q_value;
            d["breakdown_over_tau0"] =
                rep.breakdown.intersection_found ? py::object(py::float_(rep.breakdown.intersection / rep.tau0)) : py::none();
            d["oscillations"] = rep.oscillations.count;
            d["series"] = series_dict(r.series);
            return d;
        },
        py::arg("lambda_"), py::arg("t_min") = 1e-2, py::arg("t_max") = 1e3, py::arg("points_per_decade") = 100,
        py::arg("jobs") = 1, "Survival sweep over [t_min, t_max] tau0 and its regime analysis.");

    m.def(
        "weight_table",
        [](double lambda, int states, int poles) {
            py::list out;
            for (const auto& c : reproduce_weight_table(lambda, states, poles)) {
                py::dict d;
                d["state"] = c.state;
                d["pole"] = c.pole;
                d["value"] = c.value;
                d["reference"] = c.reference;
                out.append(d);
            }
            return out;
        },
        py::arg("lambda_") = 8.0, py::arg("states") = 4, py::arg("poles") = 5);

    m.def("scale_mapping", [](double lambda, double ratio, double tau_exp_ns) {
        return scale_mapping(lambda, ratio, tau_exp_ns);
    }, py::arg("lambda_"), py::arg("tau_ratio"), py::arg("tau_exp_ns"));

    m.def(
        "synthetic_experiment",
        [](double lambda, const std::vector<double>& times_ns, double tau_exp_ns, double noise, std::uint64_t seed) {
            ExperimentSeries s;
            {
                py::gil_scoped_release release;
                s = synthetic_experiment(lambda, times_ns, tau_exp_ns, noise, seed);
            }
            return array(s.intensities);
        },
        py::arg("lambda_"), py::arg("times_ns"), py::arg("tau_exp_ns"), py::arg("noise") = 0.0, py::arg("seed") = 1);

    m.def(
        "lambda_scan",
        [](const std::vector<double>& times_ns, const std::vector<double>& intensities,
           const std::vector<double>& lambdas, const std::string& norm, int jobs) {
            ScanConfig cfg;
            cfg.jobs = jobs;
            cfg.curve_lambdas.clear();
            ScanResult r;
            {
                py::gil_scoped_release release;
                auto exp = make_experiment(times_ns, intensities, normalization(norm));
                r = lambda_scan(exp, lambdas, InitialState{1}, cfg);
            }
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["lambda"] = row.lambda;
                d["tau_fit_over_tau0"] = row.tau_fit_over_tau0;
                d["ns_per_tau0"] = row.ns_per_tau0;
                d["sse"] = row.sse;
                rows.append(d);
            }
            py::dict d;
            d["best_lambda"] = r.best_lambda;
            d["tau_exp_ns"] = r.tau_exp_ns;
            d["rows"] = rows;
            return d;
        },
        py::arg("times_ns"), py::arg("intensities"), py::arg("lambdas"), py::arg("normalization") = "peak",
        py::arg("jobs") = 1);
}
