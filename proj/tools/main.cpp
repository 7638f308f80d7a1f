#include "run_config.hpp"

#include "deltashell/errors.hpp"
#include "deltashell/experiment.hpp"
#include "deltashell/io.hpp"
#include "deltashell/tables.hpp"
#include "deltashell/tdse.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace deltashell;
using deltashell::cli::RunConfig;

namespace {

enum class Format { csv, json };

struct Context {
    RunConfig cfg;
    std::string output_dir = "out";
    Format format = Format::csv;
    int jobs = 1;

    Provenance provenance(const std::string& command) const { return {command, cli::to_json(cfg)}; }
    std::string path(const std::string& name) const { return (std::filesystem::path(output_dir) / name).string(); }

    void write(const std::string& name, const std::string& text) const
    {
        write_text(path(name), text);
        std::cout << "wrote " << path(name) << "\n";
    }
    void write(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }
};

std::string label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fixed(double v, int digits)
{
    if (!std::isfinite(v))
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

const char* yes_no(bool b)
{
    return b ? "pass" : "FAIL";
}

void require_lambdas(const std::vector<double>& lambdas)
{
    if (lambdas.empty())
        throw DomainError("empty lambda list");
    for (double l : lambdas)
        if (!(l > 0.0))
            throw DomainError("lambda must be > 0, got " + label(l));
}

ModelParams params_for(double lambda)
{
    ModelParams p;
    p.lambda = lambda;
    p.validate();
    return p;
}

std::vector<double> sweep_times(const cli::TimeRange& r, double tau0)
{
    if (!(r.t_min > 0.0) || !(r.t_max > r.t_min))
        throw DomainError("times: need 0 < t_min < t_max");
    if (r.points_per_decade <= 0 && r.points < 2)
        throw DomainError("times: need points >= 2 or points_per_decade >= 1");
    auto t = r.points_per_decade > 0 ? decade_times(r.t_min, r.t_max, r.points_per_decade)
                                     : log_times(r.t_min, r.t_max, static_cast<std::size_t>(r.points));
    for (auto& v : t)
        v *= tau0;
    return t;
}

void cmd_poles(const Context& ctx)
{
    const auto& c = ctx.cfg;
    require_lambdas(c.lambdas);
    if (c.pole_count < 1)
        throw DomainError("pole_count must be >= 1");
    const auto prov = ctx.provenance("poles");
    for (double lambda : c.lambdas) {
        const auto p = params_for(lambda);
        const auto poles = find_poles(p, c.pole_count);
        const auto base = "poles_lambda_" + label(lambda);
        if (ctx.format == Format::csv)
            ctx.write(base + ".csv", poles_csv(poles, p, prov));
        else
            ctx.write(base + ".json", poles_json(poles, p, prov));
        const double tau0 = characteristic_time(p);
        std::cout << "lambda " << label(lambda) << ": k_1 a = " << fmt(poles[0].momentum.real()) << " "
                  << fmt(poles[0].momentum.imag()) << "i, tau_1/tau0 = " << fixed(poles[0].lifetime / tau0, 4)
                  << ", Q = " << fixed(poles[0].q_value, 4) << "\n";
    }
}

void cmd_survival(const Context& ctx)
{
    const auto& c = ctx.cfg;
    require_lambdas(c.lambdas);
    const auto prov = ctx.provenance("survival");
    for (double lambda : c.lambdas) {
        const auto p = params_for(lambda);
        const double tau0 = characteristic_time(p);
        const auto times = sweep_times(c.times, tau0);
        const auto series = compute_survival_series(p, InitialState{c.state}, times, c.propagator, ctx.jobs);
        std::optional<double> tau_fit;
        try {
            tau_fit = fit_exponential(series, c.exponential_window).parameter;
        } catch (const Error& e) {
            std::cerr << "lambda " << label(lambda) << ": no exponential fit (" << e.what()
                      << "); t_over_tau_fit omitted\n";
        }
        const auto base = "survival_lambda_" + label(lambda);
        if (ctx.format == Format::csv)
            ctx.write(base + ".csv", survival_csv(series, prov, tau_fit));
        else
            ctx.write(base + ".json", survival_json(series, prov, tau_fit));
    }
}

void cmd_decompose(const Context& ctx)
{
    const auto& c = ctx.cfg;
    require_lambdas(c.lambdas);
    if (c.decompose_times.empty())
        throw DomainError("empty decompose_times");
    const auto prov = ctx.provenance("decompose");
    for (double lambda : c.lambdas) {
        const auto p = params_for(lambda);
        const double tau0 = characteristic_time(p);
        Propagator prop(p, InitialState{c.state}, c.propagator);
        std::vector<double> times;
        for (double f : c.decompose_times) {
            if (!(f > 0.0))
                throw DomainError("decompose_times must be > 0");
            times.push_back(f * tau0);
        }
        std::sort(times.begin(), times.end());
        prop.prepare(times.front());
        SurvivalSeries series;
        series.params = p;
        series.state = InitialState{c.state};
        const auto x = prop.grid();
        for (double t : times) {
            series.push_back(prop.survival(t));
            const auto bg = prop.background(x, t);
            const auto poles = prop.pole_sum(x, t);
            std::string out = prov.csv_header();
            out += "# t_over_tau0: " + fmt(t / tau0) + "\n";
            out += "x,re_total,im_total,re_bg,im_bg,re_poles,im_poles\n";
            for (std::size_t i = 0; i < x.size(); ++i) {
                const cplx tot = bg[i] + poles[i];
                out += fmt(x[i]) + ',' + fmt(tot.real()) + ',' + fmt(tot.imag()) + ',' + fmt(bg[i].real()) + ',' +
                       fmt(bg[i].imag()) + ',' + fmt(poles[i].real()) + ',' + fmt(poles[i].imag()) + '\n';
            }
            ctx.write("wave_lambda_" + label(lambda) + "_t_" + label(t / tau0) + ".csv", out);
        }
        const auto base = "decompose_lambda_" + label(lambda);
        if (ctx.format == Format::csv)
            ctx.write(base + ".csv", survival_csv(series, prov));
        else
            ctx.write(base + ".json", survival_json(series, prov));
        for (std::size_t i = 0; i < series.size(); ++i) {
            const auto r = series.row(i);
            std::cout << "  t/tau0 " << label(r.time / tau0) << ": P " << fmt(r.p_total) << " = bg " << fmt(r.p_bg)
                      << " + poles " << fmt(r.p_poles) << " + interf " << fmt(r.p_interf) << "\n";
        }
    }
}

void cmd_tdse(const Context& ctx)
{
    const auto& v = ctx.cfg.validation;
    const auto p = params_for(v.lambda);
    const double t = v.t_over_tau0 * characteristic_time(p);
    const auto r = validate_against_contour(p, InitialState{ctx.cfg.state}, v.x_over_a, t, v.deltas, ctx.cfg.tdse,
                                            ctx.jobs);
    const auto prov = ctx.provenance("tdse-validate");
    ctx.write("tdse_validation.json", tdse_json(r, prov));

    const double finest = *std::min_element(v.deltas.begin(), v.deltas.end());
    ctx.write("tdse_snapshot_delta_" + label(finest) + ".csv",
              snapshot_csv(r.final_grid, r.final_values, t / p.time_scale(), prov));

    TextTable tab({"delta", "|psi|^2", "reflection"});
    for (std::size_t i = 0; i < r.deltas.size(); ++i)
        tab.add({label(r.deltas[i]), fixed(r.observables[i], 9), fmt(r.reflections[i])});
    std::cout << tab.str();
    std::cout << "extrapolated " << fixed(r.extrapolated.value, 9) << " +- " << fmt(r.extrapolated.error)
              << ", contour " << fixed(r.contour, 9) << ", relative difference " << fmt(r.relative_difference)
              << "\n";
}

struct ColumnData {
    std::vector<double> t, p;
};

ColumnData read_survival_columns(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw DataError("cannot open " + path);
    ColumnData d;
    std::string line;
    std::size_t line_no = 0;
    int ct = -1, cp = -1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cols.push_back(cell);
        if (ct < 0) {
            for (std::size_t i = 0; i < cols.size(); ++i) {
                if (cols[i] == "t")
                    ct = static_cast<int>(i);
                if (cols[i] == "p_total")
                    cp = static_cast<int>(i);
            }
            if (ct < 0 || cp < 0)
                throw DataError(path + ":" + std::to_string(line_no) + ": header lacks 't' or 'p_total'");
            continue;
        }
        if (static_cast<int>(cols.size()) <= std::max(ct, cp))
            throw DataError(path + ":" + std::to_string(line_no) + ": missing columns");
        try {
            d.t.push_back(std::stod(cols[static_cast<std::size_t>(ct)]));
            d.p.push_back(std::stod(cols[static_cast<std::size_t>(cp)]));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed number");
        }
        if (d.t.size() > 1 && !(d.t.back() > d.t[d.t.size() - 2]))
            throw DataError(path + ":" + std::to_string(line_no) + ": times not strictly increasing");
    }
    if (d.t.size() < 10)
        throw DataError(path + ": fewer than 10 data rows");
    return d;
}

void cmd_fit(const Context& ctx, const std::string& input)
{
    const auto& c = ctx.cfg;
    const auto prov = ctx.provenance("fit");
    if (!input.empty()) {
        const auto d = read_survival_columns(input);
        json out{{"provenance", prov.to_json()}, {"input", input}};
        const auto e = fit_exponential(d.t, d.p, c.exponential_window);
        out["exponential"] = fit_json(e);
        ctx.write("fit_residuals_exponential.csv", fit_residuals_csv(d.t, d.p, e, prov));
        try {
            const auto w = fit_powerlaw(d.t, d.p, c.powerlaw_window);
            out["power_law"] = fit_json(w);
            ctx.write("fit_residuals_powerlaw.csv", fit_residuals_csv(d.t, d.p, w, prov));
        } catch (const ConvergenceError& err) {
            out["power_law"] = nullptr;
            out["power_law_error"] = err.what();
        }
        ctx.write("fit.json", out);
        std::cout << "tau = " << fmt(e.parameter) << "\n";
        return;
    }
    require_lambdas(c.lambdas);
    for (double lambda : c.lambdas) {
        RegimeRun run{lambda, c.times.t_min, c.times.t_max, c.times.points_per_decade};
        if (run.points_per_decade <= 0)
            run.points_per_decade = static_cast<int>(
                std::ceil((c.times.points - 1) / std::log10(c.times.t_max / c.times.t_min)));
        const auto r = run_regime(run, InitialState{c.state}, c.propagator, c.exponential_window, c.powerlaw_window,
                                  ctx.jobs);
        const auto base = "lambda_" + label(lambda);
        json out{{"provenance", prov.to_json()}, {"report", regime_json(r.report)}};
        ctx.write("fit_" + base + ".json", out);
        ctx.write("fit_residuals_exponential_" + base + ".csv",
                  fit_residuals_csv(r.series.times, r.series.p_total, r.report.exponential, prov));
        if (r.report.power_law_found)
            ctx.write("fit_residuals_powerlaw_" + base + ".csv",
                      fit_residuals_csv(r.series.times, r.series.p_total, r.report.power_law, prov));
        std::cout << "lambda " << label(lambda) << ": tau_fit/tau0 " << fixed(r.report.tau_fit / r.report.tau0, 4)
                  << ", tau_pole/tau0 " << fixed(r.report.tau_pole / r.report.tau0, 4) << ", n "
                  << (r.report.power_law_found ? fixed(r.report.power_law.parameter, 4) : std::string("-"))
                  << ", oscillations " << r.report.oscillations.count << "\n";
    }
}

void cmd_tables(const Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto prov = ctx.provenance("tables");
    json all{{"provenance", prov.to_json()}};

    const auto cells = reproduce_weight_table(c.weights.lambda, c.weights.states, c.weights.poles);
    std::string t1 = prov.csv_header() + "state,pole,value,reference,rel_error,within_1pct,within_print,pass\n";
    TextTable tab1({"n", "c_1", "c_2", "c_3", "c_4", "c_5"});
    int t1_pass = 0, t1_strict = 0;
    std::vector<std::string> row;
    json t1j = json::array();
    for (const auto& cell : cells) {
        t1 += std::to_string(cell.state) + ',' + std::to_string(cell.pole) + ',' + fmt(cell.value) + ',' +
              fmt(cell.reference) + ',' + fmt(cell.rel_error) + ',' + (cell.within_rel ? "1" : "0") + ',' +
              (cell.within_print ? "1" : "0") + ',' + (cell.pass() ? "1" : "0") + '\n';
        t1_pass += cell.pass();
        t1_strict += cell.within_rel;
        if (cell.pole == 1)
            row = {std::to_string(cell.state)};
        row.push_back(fixed(cell.value, 4) + " (" + fixed(cell.reference, 3) + ")" + (cell.pass() ? "" : " !"));
        if (cell.pole == c.weights.poles)
            tab1.add(row);
        t1j.push_back({{"state", cell.state},
                       {"pole", cell.pole},
                       {"value", cell.value},
                       {"reference", cell.reference},
                       {"pass", cell.pass()},
                       {"within_1pct", cell.within_rel}});
    }
    all["weights"] = t1j;

    std::string t2 = prov.csv_header() + "lambda,exponent,sigma,band_lo,band_hi,pass\n";
    std::string t3 = prov.csv_header() +
                     "lambda,q,q_ref,q_pass,tau_fit_over_tau0,tau_fit_ref,tau_fit_pass,tau_pole_over_tau0,"
                     "tau_pole_ref,tau_pole_pass,discrepancy_pct,discrepancy_ref,discrepancy_pass\n";
    TextTable tab2({"lambda", "n", "sigma", "reference band", "result"});
    TextTable tab3({"lambda", "Q", "tau/tau0 (fit)", "tau_1/tau0 (poles)", "[%]", "result"});
    json regimes = json::array();
    for (const auto& run : c.table_runs) {
        const auto r = run_regime(run, InitialState{c.state}, c.propagator, c.exponential_window, c.powerlaw_window,
                                  ctx.jobs);
        const auto e = check_exponent(r.report);
        const auto l = check_lifetimes(r.report);
        t2 += fmt(e.lambda) + ',' + fmt(e.exponent) + ',' + fmt(e.sigma) + ',' + fmt(e.band_lo) + ',' +
              fmt(e.band_hi) + ',' + (e.pass ? "1" : "0") + '\n';
        t3 += fmt(l.lambda) + ',' + fmt(l.q) + ',' + fmt(l.q_ref) + ',' + (l.q_pass ? "1" : "0") + ',' +
              fmt(l.tau_fit) + ',' + fmt(l.tau_fit_ref) + ',' + (l.tau_fit_pass ? "1" : "0") + ',' +
              fmt(l.tau_pole) + ',' + fmt(l.tau_pole_ref) + ',' + (l.tau_pole_pass ? "1" : "0") + ',' +
              fmt(l.discrepancy) + ',' + fmt(l.discrepancy_ref) + ',' + (l.discrepancy_pass ? "1" : "0") + '\n';
        tab2.add({label(e.lambda), e.found ? fixed(e.exponent, 4) : "-", fixed(e.sigma, 4),
                  "[" + fixed(e.band_lo, 3) + ", " + fixed(e.band_hi, 3) + "]", yes_no(e.pass)});
        tab3.add({label(l.lambda), fixed(l.q, 4) + " (" + label(l.q_ref) + ")",
                  fixed(l.tau_fit, 3) + " (" + label(l.tau_fit_ref) + ")",
                  fixed(l.tau_pole, 3) + " (" + label(l.tau_pole_ref) + ")",
                  fixed(l.discrepancy, 2) + " (" + label(l.discrepancy_ref) + ")", yes_no(l.pass())});
        regimes.push_back(regime_json(r.report));
        ctx.write("survival_lambda_" + label(run.lambda) + ".csv",
                  survival_csv(r.series, prov, r.report.tau_fit));
    }
    all["regimes"] = regimes;

    std::ostringstream txt;
    txt << "Pole weights, lambda = " << label(c.weights.lambda) << " (reference in parentheses): " << t1_pass << "/"
        << cells.size() << " within max(1%, printed precision), " << t1_strict << " within 1%\n\n"
        << tab1.str() << "\nPower-law exponents\n\n"
        << tab2.str() << "\nQ-values and lifetimes\n\n"
        << tab3.str();
    std::cout << txt.str();
    if (ctx.format == Format::csv) {
        ctx.write("table1_weights.csv", t1);
        ctx.write("table2_exponents.csv", t2);
        ctx.write("table3_lifetimes.csv", t3);
    } else {
        ctx.write("tables.json", all);
    }
    ctx.write("tables.txt", txt.str());
}

void cmd_compare(const Context& ctx)
{
    const auto& m = ctx.cfg.compare;
    ScanConfig sc;
    sc.propagator = ctx.cfg.propagator;
    sc.window = ctx.cfg.exponential_window;
    sc.fit_t_min = m.fit_t_min;
    sc.fit_t_max = m.fit_t_max;
    sc.fit_points_per_decade = static_cast<std::size_t>(m.fit_points_per_decade);
    sc.curve_lambdas = m.curve_lambdas;
    sc.jobs = ctx.jobs;
    const InitialState state{ctx.cfg.state};
    const auto prov = ctx.provenance("compare");

    ExperimentSeries exp;
    if (!m.experiment.empty()) {
        exp = ingest_decay_csv(m.experiment, m.normalization);
    } else {
        const auto& s = m.synthetic;
        if (s.points < 10)
            throw DomainError("synthetic.points must be >= 10");
        std::vector<double> t{0.0};
        const auto lt = log_times(s.t_min_ns, s.t_max_ns, static_cast<std::size_t>(s.points));
        t.insert(t.end(), lt.begin(), lt.end());
        auto syn = synthetic_experiment(s.lambda, t, s.tau_exp_ns, s.noise, s.seed, state, sc);
        exp = make_experiment(syn.times_ns, syn.intensities, m.normalization, syn.label);
        ctx.write("experiment_synthetic.csv", format_decay_csv(exp));
    }
    const auto r = lambda_scan(exp, m.lambdas, state, sc);

    if (ctx.format == Format::json) {
        ctx.write("compare.json", scan_json(r, prov));
    } else {
        std::string rows = prov.csv_header() + "lambda,tau_fit_over_tau0,ns_per_tau0,sse,points\n";
        for (const auto& row : r.rows)
            rows += fmt(row.lambda) + ',' + fmt(row.tau_fit_over_tau0) + ',' + fmt(row.ns_per_tau0) + ',' +
                    fmt(row.sse) + ',' + std::to_string(row.points) + '\n';
        ctx.write("compare_scan.csv", rows);
        std::string curves = prov.csv_header() + "lambda,t_ns,p\n";
        for (const auto& cv : r.curves)
            for (std::size_t i = 0; i < cv.times_ns.size(); ++i)
                curves += fmt(cv.lambda) + ',' + fmt(cv.times_ns[i]) + ',' + fmt(cv.p[i]) + '\n';
        ctx.write("compare_curves.csv", curves);
        std::string points = prov.csv_header() + "# normalization: " +
                             (r.normalization == Normalization::peak ? "peak" : "first") +
                             "\nt_ns,intensity,normalized\n";
        for (std::size_t i = 0; i < exp.size(); ++i)
            points += fmt(exp.times_ns[i]) + ',' + fmt(exp.intensities[i]) + ',' + fmt(exp.normalized[i]) + '\n';
        ctx.write("compare_points.csv", points);
    }
    TextTable tab({"lambda", "tau_fit/tau0", "ns per tau0", "sse"});
    for (const auto& row : r.rows)
        tab.add({label(row.lambda), fixed(row.tau_fit_over_tau0, 4), fixed(row.ns_per_tau0, 4), fmt(row.sse)});
    std::cout << tab.str() << "normalization " << (r.normalization == Normalization::peak ? "peak" : "first")
              << ", tau_exp " << fixed(r.tau_exp_ns, 4) << " ns, best lambda " << label(r.best_lambda) << "\n";
}

void cmd_scale(const Context& ctx)
{
    const auto& s = ctx.cfg.scale;
    const double v = scale_mapping(s.lambda, s.tau_ratio, s.tau_exp_ns);
    const json out{{"provenance", ctx.provenance("scale").to_json()},
                   {"lambda", s.lambda},
                   {"tau_th_over_tau0", s.tau_ratio},
                   {"tau_exp_ns", s.tau_exp_ns},
                   {"ma2_over_mp_a0sq", v},
                   {"mass_charge_product", kMassChargeProduct}};
    if (ctx.format == Format::json)
        ctx.write("scale.json", out);
    std::printf("m a^2 = %.6g m_p a_0^2   (A Z = 479 * 254 = %.6g for comparison)\n", v, kMassChargeProduct);
}

int exit_with(const std::string& type, int code, const std::string& message)
{
    json rec{{"error", {{"type", type}, {"exit_code", code}, {"message", message}}}};
    std::cerr << rec.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Delta-shell decay model: survival probabilities, resonance poles, fits and validation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string format = "csv";
    Context ctx;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--output-dir", ctx.output_dir, "Directory for output files")->capture_default_str();
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--jobs", ctx.jobs, "Worker threads (1 is the deterministic reference)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // Flag overrides, applied on top of the config file.
    std::vector<double> lambdas;
    std::optional<int> state, pole_count, ppd, npts;
    std::optional<double> t_min, t_max, abs_tol;
    std::vector<double> times, deltas;
    std::optional<double> v_x, v_t, s_ratio, s_exp;
    std::string input, experiment, normalization;
    bool synthetic = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--lambda", lambdas, "Barrier strengths")->delimiter(',');
        sub->add_option("--state", state, "Initial well eigenstate n");
    };
    auto add_times = [&](CLI::App* sub) {
        sub->add_option("--t-min", t_min, "Start of the sweep in units of tau0");
        sub->add_option("--t-max", t_max, "End of the sweep in units of tau0");
        sub->add_option("--points", npts, "Total log-spaced points");
        sub->add_option("--points-per-decade", ppd, "Sweep density (overrides --points)");
        sub->add_option("--abs-tol", abs_tol, "Absolute quadrature tolerance");
        sub->add_option("--pole-count", pole_count, "Fixed pole count (0 = adaptive)");
    };

    auto* poles = app.add_subcommand("poles", "Resonance poles, widths, Q-values");
    add_common(poles);
    poles->add_option("--count", pole_count, "Number of poles");

    auto* surv = app.add_subcommand("survival", "Survival probability sweeps");
    add_common(surv);
    add_times(surv);

    auto* dec = app.add_subcommand("decompose", "Background / pole / interference split with wave fields");
    add_common(dec);
    dec->add_option("--times", times, "Times in units of tau0")->delimiter(',');

    auto* tdse = app.add_subcommand("tdse-validate", "Finite-width barrier TDSE against the contour representation");
    tdse->add_option("--lambda", lambdas, "Barrier strength")->delimiter(',');
    tdse->add_option("--x", v_x, "Position in units of a");
    tdse->add_option("--t", v_t, "Time in units of tau0");
    tdse->add_option("--deltas", deltas, "Barrier widths in units of a")->delimiter(',');
    tdse->add_option("--state", state, "Initial well eigenstate n");

    auto* fit = app.add_subcommand("fit", "Exponential and power-law fits with regime analysis");
    add_common(fit);
    add_times(fit);
    fit->add_option("--input", input, "Fit an existing survival CSV instead")->check(CLI::ExistingFile);

    auto* tables = app.add_subcommand("tables", "Reproduce the weight, exponent and lifetime tables");
    tables->add_option("--state", state, "Initial well eigenstate n");

    auto* compare = app.add_subcommand("compare", "Lambda scan against a measured decay curve");
    compare->add_option("--experiment", experiment, "CSV with columns t_ns,intensity")->check(CLI::ExistingFile);
    compare->add_flag("--synthetic", synthetic, "Use the synthetic model curve as the experiment");
    compare->add_option("--normalization", normalization, "peak or first")
        ->check(CLI::IsMember({"peak", "first"}));
    compare->add_option("--lambda", lambdas, "Lambda grid")->delimiter(',');

    auto* scale = app.add_subcommand("scale", "Physical scale m a^2 from a fitted lifetime");
    scale->add_option("--lambda", lambdas, "Barrier strength")->delimiter(',');
    scale->add_option("--tau-ratio", s_ratio, "Fitted model lifetime in units of tau0");
    scale->add_option("--tau-exp", s_exp, "Measured lifetime in ns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return exit_with("UsageError", 2, e.what());
    }

    try {
        if (!config_path.empty())
            ctx.cfg = cli::load_config(config_path);
        ctx.format = format == "json" ? Format::json : Format::csv;
        auto& c = ctx.cfg;
        const bool lambdas_given = !lambdas.empty();
        if (state)
            c.state = *state;
        if (t_min)
            c.times.t_min = *t_min;
        if (t_max)
            c.times.t_max = *t_max;
        if (npts)
            c.times.points = *npts;
        if (ppd)
            c.times.points_per_decade = *ppd;
        if (abs_tol)
            c.propagator.quadrature.abs_tol = *abs_tol;
        if (!times.empty())
            c.decompose_times = times;
        InitialState{c.state}.validate();

        if (*poles) {
            if (lambdas_given)
                c.lambdas = lambdas;
            if (pole_count)
                c.pole_count = *pole_count;
            cmd_poles(ctx);
        } else if (*surv || *dec || *fit) {
            if (lambdas_given)
                c.lambdas = lambdas;
            if (pole_count)
                c.propagator.poles.pole_count = *pole_count;
            if (*surv)
                cmd_survival(ctx);
            else if (*dec)
                cmd_decompose(ctx);
            else
                cmd_fit(ctx, input);
        } else if (*tdse) {
            if (lambdas_given)
                c.validation.lambda = lambdas.front();
            if (v_x)
                c.validation.x_over_a = *v_x;
            if (v_t)
                c.validation.t_over_tau0 = *v_t;
            if (!deltas.empty())
                c.validation.deltas = deltas;
            cmd_tdse(ctx);
        } else if (*tables) {
            cmd_tables(ctx);
        } else if (*compare) {
            if (lambdas_given)
                c.compare.lambdas = lambdas;
            if (!experiment.empty() && synthetic)
                throw DomainError("--experiment and --synthetic are exclusive");
            if (!experiment.empty())
                c.compare.experiment = experiment;
            if (synthetic)
                c.compare.experiment.clear();
            if (!normalization.empty())
                c.compare.normalization = normalization == "peak" ? Normalization::peak : Normalization::first;
            cmd_compare(ctx);
        } else if (*scale) {
            if (lambdas_given)
                c.scale.lambda = lambdas.front();
            if (s_ratio)
                c.scale.tau_ratio = *s_ratio;
            if (s_exp)
                c.scale.tau_exp_ns = *s_exp;
            cmd_scale(ctx);
        }
    } catch (const DataError& e) {
        return exit_with("DataError", 4, e.what());
    } catch (const ConvergenceError& e) {
        return exit_with("ConvergenceError", 3, e.what());
    } catch (const DomainError& e) {
        return exit_with("DomainError", 2, e.what());
    } catch (const std::exception& e) {
        return exit_with("Error", 1, e.what());
    }
    return 0;
}
