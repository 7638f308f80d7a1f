#include "deltashell/tables.hpp"

#include "deltashell/errors.hpp"

#include <cmath>

namespace deltashell {

namespace {

bool same_lambda(double a, double b)
{
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

} // namespace

std::vector<WeightCell> reproduce_weight_table(double lambda, int states, int poles, double rel_tol)
{
    if (states < 1 || poles < 1)
        throw DomainError("weight table needs at least one state and one pole");
    ModelParams p;
    p.lambda = lambda;
    const auto found = find_poles(p, poles);
    const bool has_ref = same_lambda(lambda, reference::table1_lambda);

    std::vector<WeightCell> cells;
    for (int n = 1; n <= states; ++n) {
        const InitialState s{n};
        for (int j = 1; j <= poles; ++j) {
            WeightCell c;
            c.state = n;
            c.pole = j;
            c.value = pole_weight(found[static_cast<std::size_t>(j - 1)], s, p).weight;
            if (has_ref && n <= 4 && j <= 5) {
                c.reference = reference::table1_weights[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(j - 1)];
                c.rel_error = std::abs(c.value / c.reference - 1.0);
                c.within_rel = c.rel_error <= rel_tol;
                c.within_print = std::abs(c.value - c.reference) <= reference::table1_print_precision;
            } else {
                c.reference = std::nan("");
                c.rel_error = std::nan("");
            }
            cells.push_back(c);
        }
    }
    return cells;
}

std::vector<double> decade_times(double t_min, double t_max, int points_per_decade)
{
    if (!(t_min > 0.0) || !(t_max > t_min) || points_per_decade < 1)
        throw DomainError("decade_times: need 0 < t_min < t_max and points_per_decade >= 1");
    const double decades = std::log10(t_max / t_min);
    const auto n = static_cast<int>(std::floor(decades * points_per_decade + 1e-9));
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        t.push_back(t_min * std::pow(10.0, static_cast<double>(k) / points_per_decade));
    return t;
}

RegimeRunResult run_regime(const RegimeRun& run, const InitialState& state, const PropagatorConfig& cfg,
                           const ExponentialWindow& exp_window, const PowerLawWindow& pow_window, int jobs)
{
    ModelParams p;
    p.lambda = run.lambda;
    p.validate();
    const double tau0 = characteristic_time(p);
    auto times = decade_times(run.t_min, run.t_max, run.points_per_decade);
    for (auto& t : times)
        t *= tau0;

    RegimeRunResult r;
    r.run = run;
    r.series = compute_survival_series(p, state, times, cfg, jobs);
    r.first_pole = find_poles(p, 1).front();
    r.report = regime_report(r.series, r.first_pole, exp_window, pow_window);
    return r;
}

std::vector<RegimeRun> default_regime_runs()
{
    return {{0.3, 1e-2, 1e5, 100}, {0.65, 1e-2, 1e5, 100}, {1.0, 1e-2, 1e4, 100}, {3.6, 1e-2, 1e3, 100}};
}

ExponentCheck check_exponent(const RegimeReport& r)
{
    for (const auto& row : reference::table2) {
        if (!same_lambda(r.lambda, row.lambda))
            continue;
        ExponentCheck c;
        c.lambda = r.lambda;
        c.found = r.power_law_found;
        c.exponent = r.power_law.parameter;
        c.sigma = r.power_law.uncertainty;
        c.band_lo = row.exponent - 3.0 * row.sigma;
        c.band_hi = row.exponent + 3.0 * row.sigma;
        c.pass = c.found && c.exponent >= c.band_lo && c.exponent <= c.band_hi;
        return c;
    }
    throw DomainError("no reference exponent for lambda = " + std::to_string(r.lambda));
}

LifetimeCheck check_lifetimes(const RegimeReport& r)
{
    for (const auto& row : reference::table3) {
        if (!same_lambda(r.lambda, row.lambda))
            continue;
        LifetimeCheck c;
        c.lambda = r.lambda;
        c.q = r.q_value;
        c.q_ref = row.q;
        c.tau_fit = r.tau_fit / r.tau0;
        c.tau_fit_ref = row.tau_fit;
        c.tau_pole = r.tau_pole / r.tau0;
        c.tau_pole_ref = row.tau_pole;
        c.discrepancy = r.discrepancy_pct;
        c.discrepancy_ref = row.discrepancy_pct;
        c.tau_tol = same_lambda(r.lambda, 0.3) ? 0.05 : 0.02;
        c.q_pass = std::abs(c.q / c.q_ref - 1.0) <= 0.02;
        c.tau_fit_pass = std::abs(c.tau_fit / c.tau_fit_ref - 1.0) <= c.tau_tol;
        c.tau_pole_pass = std::abs(c.tau_pole / c.tau_pole_ref - 1.0) <= c.tau_tol;
        c.discrepancy_pass = std::abs(c.discrepancy - c.discrepancy_ref) <= 5.0;
        return c;
    }
    throw DomainError("no reference lifetimes for lambda = " + std::to_string(r.lambda));
}

} // namespace deltashell
