#include "deltashell/io.hpp"

#include "deltashell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#ifndef DELTASHELL_VERSION
#define DELTASHELL_VERSION "0.0.0"
#endif

namespace deltashell {

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> known, std::string_view section)
{
    if (!j.is_object())
        throw DomainError("config section '" + std::string(section) + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw DomainError("unknown config key '" + std::string(section) + "." + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        j.at(key).get_to(out);
    } catch (const json::exception& e) {
        throw DomainError(std::string("config key '") + key + "': " + e.what());
    }
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string policy_name(ExponentialWindow::Policy p)
{
    return p == ExponentialWindow::Policy::deviation ? "deviation" : "probability_band";
}

} // namespace

std::string_view version()
{
    return DELTASHELL_VERSION;
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string Provenance::config_hash() const
{
    return "fnv1a64:" + hex64(fnv1a(config.dump()));
}

std::string Provenance::csv_header() const
{
    std::string out;
    out += "# deltashell " + std::string(version()) + "\n";
    out += "# command: " + command + "\n";
    out += "# config_hash: " + config_hash() + "\n";
    out += "# config: " + config.dump() + "\n";
    return out;
}

json Provenance::to_json() const
{
    return json{{"tool", "deltashell"},
                {"version", std::string(version())},
                {"command", command},
                {"config_hash", config_hash()},
                {"config", config}};
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const QuadratureConfig& c)
{
    return {{"abs_tol", c.abs_tol},
            {"rel_tol", c.rel_tol},
            {"damping_exponent", c.damping_exponent},
            {"max_panels", c.max_panels}};
}

json to_json(const PoleSumConfig& c)
{
    return {{"pole_count", c.pole_count},
            {"min_poles", c.min_poles},
            {"tail_tol", c.tail_tol},
            {"max_poles", c.max_poles}};
}

json to_json(const PropagatorConfig& c)
{
    return {{"quadrature", to_json(c.quadrature)},
            {"poles", to_json(c.poles)},
            {"grid_intervals", c.grid_intervals},
            {"rule", c.rule == SpatialRule::simpson ? "simpson" : "trapezoid"}};
}

json to_json(const ExponentialWindow& w)
{
    return {{"policy", policy_name(w.policy)},
            {"band_hi", w.band_hi},
            {"band_lo", w.band_lo},
            {"zeno_fraction", w.zeno_fraction},
            {"deviation", w.deviation},
            {"max_iterations", w.max_iterations},
            {"min_points", w.min_points}};
}

json to_json(const PowerLawWindow& w)
{
    return {{"slope_tolerance", w.slope_tolerance},
            {"min_decades", w.min_decades},
            {"min_points", w.min_points},
            {"t_min", w.t_min},
            {"t_max", number_or_null(w.t_max)}};
}

json to_json(const TdseConfig& c)
{
    return {{"delta", c.delta},
            {"domain_length", c.domain_length},
            {"dx", c.dx},
            {"dt", c.dt},
            {"absorber",
             {{"enabled", c.absorber.enabled},
              {"start_fraction", c.absorber.start_fraction},
              {"strength", c.absorber.strength},
              {"power", c.absorber.power}}},
            {"reflection_limit", c.reflection_limit},
            {"ledger_samples", c.ledger_samples}};
}

void from_json(const json& j, QuadratureConfig& c)
{
    check_keys(j, {"abs_tol", "rel_tol", "damping_exponent", "max_panels"}, "quadrature");
    read(j, "abs_tol", c.abs_tol);
    read(j, "rel_tol", c.rel_tol);
    read(j, "damping_exponent", c.damping_exponent);
    read(j, "max_panels", c.max_panels);
}

void from_json(const json& j, PoleSumConfig& c)
{
    check_keys(j, {"pole_count", "min_poles", "tail_tol", "max_poles"}, "poles");
    read(j, "pole_count", c.pole_count);
    read(j, "min_poles", c.min_poles);
    read(j, "tail_tol", c.tail_tol);
    read(j, "max_poles", c.max_poles);
}

void from_json(const json& j, PropagatorConfig& c)
{
    check_keys(j, {"quadrature", "poles", "grid_intervals", "rule"}, "propagator");
    if (j.contains("quadrature"))
        from_json(j.at("quadrature"), c.quadrature);
    if (j.contains("poles"))
        from_json(j.at("poles"), c.poles);
    read(j, "grid_intervals", c.grid_intervals);
    if (j.contains("rule")) {
        const auto r = j.at("rule").get<std::string>();
        if (r == "trapezoid")
            c.rule = SpatialRule::trapezoid;
        else if (r == "simpson")
            c.rule = SpatialRule::simpson;
        else
            throw DomainError("propagator.rule must be 'trapezoid' or 'simpson'");
    }
}

void from_json(const json& j, ExponentialWindow& w)
{
    check_keys(j, {"policy", "band_hi", "band_lo", "zeno_fraction", "deviation", "max_iterations", "min_points"},
               "exponential_window");
    if (j.contains("policy")) {
        const auto p = j.at("policy").get<std::string>();
        if (p == "probability_band")
            w.policy = ExponentialWindow::Policy::probability_band;
        else if (p == "deviation")
            w.policy = ExponentialWindow::Policy::deviation;
        else
            throw DomainError("exponential_window.policy must be 'probability_band' or 'deviation'");
    }
    read(j, "band_hi", w.band_hi);
    read(j, "band_lo", w.band_lo);
    read(j, "zeno_fraction", w.zeno_fraction);
    read(j, "deviation", w.deviation);
    read(j, "max_iterations", w.max_iterations);
    read(j, "min_points", w.min_points);
}

void from_json(const json& j, PowerLawWindow& w)
{
    check_keys(j, {"slope_tolerance", "min_decades", "min_points", "t_min", "t_max"}, "powerlaw_window");
    read(j, "slope_tolerance", w.slope_tolerance);
    read(j, "min_decades", w.min_decades);
    read(j, "min_points", w.min_points);
    read(j, "t_min", w.t_min);
    if (j.contains("t_max"))
        w.t_max = j.at("t_max").is_null() ? std::numeric_limits<double>::infinity() : j.at("t_max").get<double>();
}

void from_json(const json& j, TdseConfig& c)
{
    check_keys(j, {"delta", "domain_length", "dx", "dt", "absorber", "reflection_limit", "ledger_samples"}, "tdse");
    read(j, "delta", c.delta);
    read(j, "domain_length", c.domain_length);
    read(j, "dx", c.dx);
    read(j, "dt", c.dt);
    read(j, "reflection_limit", c.reflection_limit);
    read(j, "ledger_samples", c.ledger_samples);
    if (j.contains("absorber")) {
        const auto& a = j.at("absorber");
        check_keys(a, {"enabled", "start_fraction", "strength", "power"}, "tdse.absorber");
        read(a, "enabled", c.absorber.enabled);
        read(a, "start_fraction", c.absorber.start_fraction);
        read(a, "strength", c.absorber.strength);
        read(a, "power", c.absorber.power);
    }
}

std::string survival_csv(const SurvivalSeries& s, const Provenance& prov, std::optional<double> tau_fit)
{
    const double tau0 = characteristic_time(s.params);
    std::string out = prov.csv_header();
    out += "# lambda: " + fmt(s.params.lambda) + ", state: " + std::to_string(s.state.mode) +
           ", pole_count: " + std::to_string(s.pole_count) + "\n";
    out += "t,t_over_tau0,p_total,p_bg,p_poles,p_interf,err_est";
    out += tau_fit ? ",t_over_tau_fit\n" : "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += fmt(s.times[i]) + ',' + fmt(s.times[i] / tau0) + ',' + fmt(s.p_total[i]) + ',' + fmt(s.p_bg[i]) +
               ',' + fmt(s.p_poles[i]) + ',' + fmt(s.p_interf[i]) + ',' + fmt(s.err_est[i]);
        if (tau_fit)
            out += ',' + fmt(s.times[i] / *tau_fit);
        out += '\n';
    }
    return out;
}

json survival_json(const SurvivalSeries& s, const Provenance& prov, std::optional<double> tau_fit)
{
    const double tau0 = characteristic_time(s.params);
    json rows = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        json r{{"t", s.times[i]},
               {"t_over_tau0", s.times[i] / tau0},
               {"p_total", s.p_total[i]},
               {"p_bg", number_or_null(s.p_bg[i])},
               {"p_poles", number_or_null(s.p_poles[i])},
               {"p_interf", number_or_null(s.p_interf[i])},
               {"err_est", s.err_est[i]}};
        if (tau_fit)
            r["t_over_tau_fit"] = s.times[i] / *tau_fit;
        rows.push_back(std::move(r));
    }
    json meta{{"lambda", s.params.lambda},
              {"mass", s.params.mass},
              {"well_width", s.params.well_width},
              {"hbar", s.params.hbar},
              {"state", s.state.mode},
              {"tau0", tau0},
              {"pole_count", s.pole_count},
              {"propagator", to_json(s.config)},
              {"version", version()}};
    if (tau_fit)
        meta["tau_fit"] = *tau_fit;
    return {{"provenance", prov.to_json()}, {"metadata", meta}, {"rows", rows}};
}

std::string poles_csv(std::span<const Pole> poles, const ModelParams& params, const Provenance& prov)
{
    const double tau0 = characteristic_time(params);
    std::string out = prov.csv_header();
    out += "n,re_k,im_k,gamma,tau_over_tau0,q_value,residual\n";
    for (const auto& p : poles)
        out += std::to_string(p.index) + ',' + fmt(p.momentum.real()) + ',' + fmt(p.momentum.imag()) + ',' +
               fmt(p.width) + ',' + fmt(p.lifetime / tau0) + ',' + fmt(p.q_value) + ',' + fmt(p.residual) + '\n';
    return out;
}

json poles_json(std::span<const Pole> poles, const ModelParams& params, const Provenance& prov)
{
    const double tau0 = characteristic_time(params);
    json rows = json::array();
    for (const auto& p : poles)
        rows.push_back({{"n", p.index},
                        {"re_k", p.momentum.real()},
                        {"im_k", p.momentum.imag()},
                        {"gamma", p.width},
                        {"tau_over_tau0", p.lifetime / tau0},
                        {"q_value", p.q_value},
                        {"residual", p.residual},
                        {"certified", p.certified},
                        {"poorly_formed", p.poorly_formed}});
    return {{"provenance", prov.to_json()},
            {"metadata", {{"lambda", params.lambda}, {"tau0", tau0}}},
            {"rows", rows}};
}

std::string snapshot_csv(std::span<const double> x, std::span<const cplx> values, double time,
                         const Provenance& prov)
{
    std::string out = prov.csv_header();
    out += "# time: " + fmt(time) + "\n";
    out += "x,re_psi,im_psi\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out += fmt(x[i]) + ',' + fmt(values[i].real()) + ',' + fmt(values[i].imag()) + '\n';
    return out;
}

json fit_json(const FitResult& f)
{
    return {{"kind", f.kind == FitKind::exponential ? "exponential" : "power_law"},
            {"parameter", f.parameter},
            {"amplitude", f.amplitude},
            {"uncertainty", f.uncertainty},
            {"t_lo", f.t_lo},
            {"t_hi", f.t_hi},
            {"residual_rms", f.residual_rms},
            {"points", f.points},
            {"iterations", f.iterations}};
}

std::string fit_residuals_csv(std::span<const double> t, std::span<const double> p, const FitResult& f,
                              const Provenance& prov)
{
    std::string out = prov.csv_header();
    out += "t,p,model,log_residual\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < f.t_lo || t[i] > f.t_hi)
            continue;
        const double model = f.kind == FitKind::exponential ? f.amplitude * std::exp(-t[i] / f.parameter)
                                                            : f.amplitude * std::pow(t[i], -f.parameter);
        out += fmt(t[i]) + ',' + fmt(p[i]) + ',' + fmt(model) + ',' + fmt(std::log(p[i]) - std::log(model)) + '\n';
    }
    return out;
}

json regime_json(const RegimeReport& r)
{
    const auto& b = r.breakdown;
    const auto& o = r.oscillations;
    return {{"lambda", r.lambda},
            {"tau0", r.tau0},
            {"exponential", fit_json(r.exponential)},
            {"power_law", r.power_law_found ? fit_json(r.power_law) : json(nullptr)},
            {"tau_fit_over_tau0", r.tau_fit / r.tau0},
            {"tau_pole_over_tau0", r.tau_pole / r.tau0},
            {"discrepancy_pct", r.discrepancy_pct},
            {"discrepancy_vs_fit_pct", r.discrepancy_vs_fit_pct},
            {"q_value", r.q_value},
            {"breakdown",
             {{"intersection", b.intersection_found ? json(b.intersection) : json(nullptr)},
              {"deviation_time", b.deviation_found ? json(b.deviation_time) : json(nullptr)},
              {"p_at_deviation", b.deviation_found ? json(b.p_at_deviation) : json(nullptr)},
              {"p_at_powerlaw_entry", r.power_law_found ? json(b.p_at_powerlaw_entry) : json(nullptr)},
              {"estimate", number_or_null(r.breakdown_estimate)}}},
            {"oscillations",
             {{"count", o.count},
              {"t_lo", o.t_lo},
              {"t_hi", o.t_hi},
              {"points", o.points},
              {"resolved", o.resolved},
              {"extrema_times", o.extrema_times}}}};
}

json tdse_json(const TdseValidation& v, const Provenance& prov)
{
    json ladder = json::array();
    for (std::size_t i = 0; i < v.deltas.size(); ++i)
        ladder.push_back({{"delta", v.deltas[i]}, {"observable", v.observables[i]}, {"reflection", v.reflections[i]}});
    return {{"provenance", prov.to_json()},
            {"lambda", v.lambda},
            {"x_over_a", v.x},
            {"t", v.t},
            {"ladder", ladder},
            {"extrapolation",
             {{"value", v.extrapolated.value},
              {"linear_value", v.extrapolated.linear_value},
              {"error", v.extrapolated.error},
              {"monotone", v.extrapolated.monotone}}},
            {"contour", v.contour},
            {"relative_difference", v.relative_difference}};
}

json scan_json(const ScanResult& r, const Provenance& prov)
{
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"lambda", row.lambda},
                        {"tau_fit_over_tau0", row.tau_fit_over_tau0},
                        {"ns_per_tau0", row.ns_per_tau0},
                        {"sse", row.sse},
                        {"points", row.points}});
    json curves = json::array();
    for (const auto& c : r.curves)
        curves.push_back({{"lambda", c.lambda}, {"t_ns", c.times_ns}, {"p", c.p}});
    return {{"provenance", prov.to_json()},
            {"normalization", r.normalization == Normalization::peak ? "peak" : "first"},
            {"tau_exp_ns", r.tau_exp_ns},
            {"best_lambda", r.best_lambda},
            {"rows", rows},
            {"curves", curves}};
}

TextTable::TextTable(std::vector<std::string> header)
{
    rows_.push_back(std::move(header));
}

void TextTable::add(std::vector<std::string> row)
{
    row.resize(rows_.front().size());
    rows_.push_back(std::move(row));
}

std::string TextTable::str() const
{
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& r : rows_)
        for (std::size_t c = 0; c < r.size(); ++c)
            width[c] = std::max(width[c], r[c].size());
    std::string out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        for (std::size_t c = 0; c < width.size(); ++c) {
            if (c)
                out += "  ";
            out += rows_[i][c];
            if (c + 1 < width.size())
                out.append(width[c] - rows_[i][c].size(), ' ');
        }
        out += '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : width)
                total += w;
            out.append(total + 2 * (width.size() - 1), '-');
            out += '\n';
        }
    }
    return out;
}

void write_text(const std::string& path, std::string_view text)
{
    namespace fs = std::filesystem;
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path())
        fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw Error("cannot write " + path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f)
        throw Error("write failed for " + path);
}

} // namespace deltashell
