#include "run_config.hpp"

#include "deltashell/errors.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

namespace deltashell::cli {

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

Normalization parse_normalization(const std::string& s)
{
    if (s == "peak")
        return Normalization::peak;
    if (s == "first")
        return Normalization::first;
    throw DomainError("normalization must be 'peak' or 'first'");
}

} // namespace

json to_json(const RunConfig& c)
{
    json runs = json::array();
    for (const auto& r : c.table_runs)
        runs.push_back({{"lambda", r.lambda},
                        {"t_min", r.t_min},
                        {"t_max", r.t_max},
                        {"points_per_decade", r.points_per_decade}});
    const auto& s = c.compare.synthetic;
    return {
        {"lambdas", c.lambdas},
        {"state", c.state},
        {"times",
         {{"t_min", c.times.t_min},
          {"t_max", c.times.t_max},
          {"points", c.times.points},
          {"points_per_decade", c.times.points_per_decade}}},
        {"pole_count", c.pole_count},
        {"decompose_times", c.decompose_times},
        {"propagator", deltashell::to_json(c.propagator)},
        {"exponential_window", deltashell::to_json(c.exponential_window)},
        {"powerlaw_window", deltashell::to_json(c.powerlaw_window)},
        {"tdse", deltashell::to_json(c.tdse)},
        {"validation",
         {{"lambda", c.validation.lambda},
          {"x_over_a", c.validation.x_over_a},
          {"t_over_tau0", c.validation.t_over_tau0},
          {"deltas", c.validation.deltas}}},
        {"weights", {{"lambda", c.weights.lambda}, {"states", c.weights.states}, {"poles", c.weights.poles}}},
        {"table_runs", runs},
        {"compare",
         {{"experiment", c.compare.experiment},
          {"normalization", c.compare.normalization == Normalization::peak ? "peak" : "first"},
          {"lambdas", c.compare.lambdas},
          {"curve_lambdas", c.compare.curve_lambdas},
          {"fit_t_min", c.compare.fit_t_min},
          {"fit_t_max", c.compare.fit_t_max},
          {"fit_points_per_decade", c.compare.fit_points_per_decade},
          {"synthetic",
           {{"lambda", s.lambda},
            {"tau_exp_ns", s.tau_exp_ns},
            {"noise", s.noise},
            {"seed", s.seed},
            {"t_min_ns", s.t_min_ns},
            {"t_max_ns", s.t_max_ns},
            {"points", s.points}}}}},
        {"scale",
         {{"lambda", c.scale.lambda}, {"tau_ratio", c.scale.tau_ratio}, {"tau_exp_ns", c.scale.tau_exp_ns}}},
    };
}

RunConfig config_from_json(const json& j)
{
    RunConfig c;
    check_keys(j,
               {"lambdas", "state", "times", "pole_count", "decompose_times", "propagator", "exponential_window",
                "powerlaw_window", "tdse", "validation", "weights", "table_runs", "compare", "scale"},
               "");
    read(j, "lambdas", c.lambdas);
    read(j, "state", c.state);
    read(j, "pole_count", c.pole_count);
    read(j, "decompose_times", c.decompose_times);
    if (j.contains("times")) {
        const auto& t = j.at("times");
        check_keys(t, {"t_min", "t_max", "points", "points_per_decade"}, "times");
        read(t, "t_min", c.times.t_min);
        read(t, "points", c.times.points);
        read(t, "t_max", c.times.t_max);
        read(t, "points_per_decade", c.times.points_per_decade);
    }
    if (j.contains("propagator"))
        deltashell::from_json(j.at("propagator"), c.propagator);
    if (j.contains("exponential_window"))
        deltashell::from_json(j.at("exponential_window"), c.exponential_window);
    if (j.contains("powerlaw_window"))
        deltashell::from_json(j.at("powerlaw_window"), c.powerlaw_window);
    if (j.contains("tdse"))
        deltashell::from_json(j.at("tdse"), c.tdse);
    if (j.contains("validation")) {
        const auto& v = j.at("validation");
        check_keys(v, {"lambda", "x_over_a", "t_over_tau0", "deltas"}, "validation");
        read(v, "lambda", c.validation.lambda);
        read(v, "x_over_a", c.validation.x_over_a);
        read(v, "t_over_tau0", c.validation.t_over_tau0);
        read(v, "deltas", c.validation.deltas);
    }
    if (j.contains("weights")) {
        const auto& w = j.at("weights");
        check_keys(w, {"lambda", "states", "poles"}, "weights");
        read(w, "lambda", c.weights.lambda);
        read(w, "states", c.weights.states);
        read(w, "poles", c.weights.poles);
    }
    if (j.contains("table_runs")) {
        c.table_runs.clear();
        for (const auto& r : j.at("table_runs")) {
            check_keys(r, {"lambda", "t_min", "t_max", "points_per_decade"}, "table_runs[]");
            RegimeRun run;
            read(r, "lambda", run.lambda);
            read(r, "t_min", run.t_min);
            read(r, "t_max", run.t_max);
            read(r, "points_per_decade", run.points_per_decade);
            c.table_runs.push_back(run);
        }
    }
    if (j.contains("compare")) {
        const auto& m = j.at("compare");
        check_keys(m,
                   {"experiment", "normalization", "lambdas", "curve_lambdas", "fit_t_min", "fit_t_max",
                    "fit_points_per_decade", "synthetic"},
                   "compare");
        read(m, "experiment", c.compare.experiment);
        if (m.contains("normalization"))
            c.compare.normalization = parse_normalization(m.at("normalization").get<std::string>());
        read(m, "lambdas", c.compare.lambdas);
        read(m, "curve_lambdas", c.compare.curve_lambdas);
        read(m, "fit_t_min", c.compare.fit_t_min);
        read(m, "fit_t_max", c.compare.fit_t_max);
        read(m, "fit_points_per_decade", c.compare.fit_points_per_decade);
        if (m.contains("synthetic")) {
            const auto& s = m.at("synthetic");
            auto& o = c.compare.synthetic;
            check_keys(s, {"lambda", "tau_exp_ns", "noise", "seed", "t_min_ns", "t_max_ns", "points"},
                       "compare.synthetic");
            read(s, "lambda", o.lambda);
            read(s, "tau_exp_ns", o.tau_exp_ns);
            read(s, "noise", o.noise);
            read(s, "seed", o.seed);
            read(s, "t_min_ns", o.t_min_ns);
            read(s, "t_max_ns", o.t_max_ns);
            read(s, "points", o.points);
        }
    }
    if (j.contains("scale")) {
        const auto& s = j.at("scale");
        check_keys(s, {"lambda", "tau_ratio", "tau_exp_ns"}, "scale");
        read(s, "lambda", c.scale.lambda);
        read(s, "tau_ratio", c.scale.tau_ratio);
        read(s, "tau_exp_ns", c.scale.tau_exp_ns);
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw DomainError("cannot open config " + path);
    json j;
    try {
        j = json::parse(f, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw DomainError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

} // namespace deltashell::cli
