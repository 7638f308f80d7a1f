#include "deltashell/experiment.hpp"

#include "deltashell/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace deltashell {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out)
{
    if (s.empty())
        return false;
    const char* first = s.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

void normalize(ExperimentSeries& e)
{
    if (e.intensities.empty())
        return;
    e.reference = e.normalization == Normalization::peak
                      ? *std::max_element(e.intensities.begin(), e.intensities.end())
                      : e.intensities.front();
    if (!(e.reference > 0.0))
        throw DataError("normalization reference intensity must be > 0");
    e.normalized.resize(e.intensities.size());
    for (std::size_t i = 0; i < e.intensities.size(); ++i)
        e.normalized[i] = e.intensities[i] / e.reference;
}

// Lifetime of the model in units of tau0.
double model_lifetime(double lambda, const InitialState& state, const ScanConfig& cfg)
{
    ModelParams p;
    p.lambda = lambda;
    const double tau0 = characteristic_time(p);
    const auto n = static_cast<std::size_t>(std::ceil(std::log10(cfg.fit_t_max / cfg.fit_t_min) *
                                                      static_cast<double>(cfg.fit_points_per_decade))) + 1;
    const auto times = log_times(cfg.fit_t_min * tau0, cfg.fit_t_max * tau0, n);
    const auto series = compute_survival_series(p, state, times, cfg.propagator, cfg.jobs);
    return fit_exponential(series, cfg.window).parameter / tau0;
}

std::vector<double> model_curve(double lambda, double ns_per_tau0, const std::vector<double>& times_ns,
                                const InitialState& state, const ScanConfig& cfg)
{
    ModelParams p;
    p.lambda = lambda;
    const double tau0 = characteristic_time(p);
    std::vector<double> t(times_ns.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = times_ns[i] / ns_per_tau0 * tau0;
    return compute_survival_series(p, state, t, cfg.propagator, cfg.jobs).p_total;
}

} // namespace

void ExperimentSeries::validate() const
{
    if (times_ns.size() != intensities.size())
        throw DataError("experiment: column lengths differ");
    if (times_ns.size() < 10)
        throw DataError("experiment: need at least 10 rows, got " + std::to_string(times_ns.size()));
    for (std::size_t i = 0; i < times_ns.size(); ++i) {
        if (!(times_ns[i] >= 0.0))
            throw DataError("experiment: negative time at row " + std::to_string(i + 1));
        if (i > 0 && !(times_ns[i] > times_ns[i - 1]))
            throw DataError("experiment: times not strictly increasing at row " + std::to_string(i + 1));
        if (!(intensities[i] >= 0.0))
            throw DataError("experiment: negative intensity at row " + std::to_string(i + 1));
    }
}

ExperimentSeries parse_decay_csv(const std::string& text, Normalization policy, const std::string& label)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    ExperimentSeries e;
    e.normalization = policy;
    e.label = label;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
            throw DataError(label + ":" + std::to_string(line_no) + ": expected exactly two comma-separated columns");
        const std::string a = trim(std::string_view(t).substr(0, comma));
        const std::string b = trim(std::string_view(t).substr(comma + 1));
        if (!header_seen) {
            if (a != "t_ns" || b != "intensity")
                throw DataError(label + ":" + std::to_string(line_no) + ": header must be 't_ns,intensity'");
            header_seen = true;
            continue;
        }
        double tv = 0.0, iv = 0.0;
        if (!parse_double(a, tv) || !parse_double(b, iv))
            throw DataError(label + ":" + std::to_string(line_no) + ": malformed number");
        if (tv < 0.0)
            throw DataError(label + ":" + std::to_string(line_no) + ": negative time");
        if (iv < 0.0)
            throw DataError(label + ":" + std::to_string(line_no) + ": negative intensity " + b);
        if (!e.times_ns.empty() && !(tv > e.times_ns.back()))
            throw DataError(label + ":" + std::to_string(line_no) + ": times not strictly increasing");
        e.times_ns.push_back(tv);
        e.intensities.push_back(iv);
    }
    if (!header_seen)
        throw DataError(label + ": missing header 't_ns,intensity'");
    e.validate();
    normalize(e);
    return e;
}

ExperimentSeries ingest_decay_csv(const std::string& path, Normalization policy)
{
    std::ifstream f(path);
    if (!f)
        throw DataError("cannot open " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_decay_csv(buf.str(), policy, path);
}

ExperimentSeries make_experiment(std::vector<double> times_ns, std::vector<double> intensities, Normalization policy,
                                 std::string label)
{
    ExperimentSeries e;
    e.times_ns = std::move(times_ns);
    e.intensities = std::move(intensities);
    e.normalization = policy;
    e.label = std::move(label);
    e.validate();
    normalize(e);
    return e;
}

std::string format_decay_csv(const ExperimentSeries& series)
{
    std::string out = "t_ns,intensity\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", series.times_ns[i], series.intensities[i]);
        out += buf;
    }
    return out;
}

ScanResult lambda_scan(const ExperimentSeries& experiment, const std::vector<double>& lambdas,
                       const InitialState& state, const ScanConfig& cfg)
{
    experiment.validate();
    if (lambdas.empty())
        throw DomainError("lambda scan: empty lambda grid");
    for (double l : lambdas)
        if (!(l > 0.0))
            throw DomainError("lambda scan: lambdas must be > 0");

    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (double v : experiment.normalized)
        if (v > 0.0) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
    if (!(hi / lo >= 1e3))
        throw DataError("lambda scan: experiment spans less than 3 decades in intensity; "
                        "both the exponential and the power-law regime are needed");

    ScanResult res;
    res.normalization = experiment.normalization;
    res.tau_exp_ns = fit_exponential(experiment.times_ns, experiment.normalized, cfg.window).parameter;

    for (double lambda : lambdas) {
        ScanRow row;
        row.lambda = lambda;
        row.tau_fit_over_tau0 = model_lifetime(lambda, state, cfg);
        row.ns_per_tau0 = res.tau_exp_ns / row.tau_fit_over_tau0;
        const auto p = model_curve(lambda, row.ns_per_tau0, experiment.times_ns, state, cfg);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(experiment.normalized[i] > 0.0) || !(p[i] > 0.0))
                continue;
            const double r = std::log(experiment.normalized[i]) - std::log(p[i]);
            row.sse += r * r;
            ++row.points;
        }
        res.rows.push_back(row);
    }
    const auto best = std::min_element(res.rows.begin(), res.rows.end(),
                                       [](const ScanRow& a, const ScanRow& b) { return a.sse < b.sse; });
    res.best_lambda = best->lambda;

    double t_lo = 0.0;
    for (double t : experiment.times_ns)
        if (t > 0.0) {
            t_lo = t;
            break;
        }
    const double t_hi = experiment.times_ns.back();
    if (t_lo > 0.0 && t_hi > t_lo && cfg.curve_points >= 2) {
        const auto times = log_times(t_lo, t_hi, cfg.curve_points);
        for (double lambda : cfg.curve_lambdas) {
            double ns_per_tau0 = 0.0;
            for (const auto& r : res.rows)
                if (r.lambda == lambda)
                    ns_per_tau0 = r.ns_per_tau0;
            if (ns_per_tau0 == 0.0)
                ns_per_tau0 = res.tau_exp_ns / model_lifetime(lambda, state, cfg);
            res.curves.push_back(ModelCurve{lambda, times, model_curve(lambda, ns_per_tau0, times, state, cfg)});
        }
    }
    return res;
}

ExperimentSeries synthetic_experiment(double lambda, const std::vector<double>& times_ns, double tau_exp_ns,
                                      double noise, std::uint64_t seed, const InitialState& state,
                                      const ScanConfig& cfg)
{
    if (!(tau_exp_ns > 0.0) || noise < 0.0)
        throw DomainError("synthetic experiment: need tau_exp > 0 and noise >= 0");
    const double ns_per_tau0 = tau_exp_ns / model_lifetime(lambda, state, cfg);
    auto p = model_curve(lambda, ns_per_tau0, times_ns, state, cfg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : p)
        v = std::max(0.0, v * (1.0 + noise * gauss(rng)));
    return make_experiment(times_ns, std::move(p), Normalization::first, "synthetic lambda=" + std::to_string(lambda));
}

double scale_mapping(double lambda, double tau_th_over_tau0, double tau_exp_ns, const PhysicalConstants& c)
{
    if (!(lambda > 0.0) || !(tau_th_over_tau0 > 0.0) || !(tau_exp_ns > 0.0))
        throw DomainError("scale_mapping: all inputs must be > 0");
    const double tau0 = tau_exp_ns * c.nanosecond / tau_th_over_tau0;
    const double ma2 = 2.0 * pi * pi * pi * c.hbar / (lambda * lambda) * tau0;
    return ma2 / (c.proton_mass * c.bohr_radius * c.bohr_radius);
}

} // namespace deltashell
