#pragma once

#include "deltashell/analysis.hpp"
#include "deltashell/experiment.hpp"
#include "deltashell/io.hpp"
#include "deltashell/propagator.hpp"
#include "deltashell/tables.hpp"
#include "deltashell/tdse.hpp"

#include <optional>
#include <string>
#include <vector>

namespace deltashell::cli {

struct TimeRange {
    // units of tau0
    double t_min = 1e-3;
    double t_max = 1e3;
    /// Total log-spaced points; points_per_decade > 0 takes precedence.
    int points = 400;
    int points_per_decade = 0;
};

struct ValidationSettings {
    double lambda = 8.0;
    double x_over_a = 0.6;
    double t_over_tau0 = 0.4;
    std::vector<double> deltas{0.04, 0.02, 0.01};
};

struct WeightSettings {
    double lambda = 8.0;
    int states = 4;
    int poles = 5;
};

struct SyntheticSettings {
    double lambda = 3.6;
    double tau_exp_ns = 3.9;
    double noise = 0.02;
    std::uint64_t seed = 20240601;
    double t_min_ns = 0.04;
    double t_max_ns = 400.0;
    int points = 240;
};

struct CompareSettings {
    std::string experiment;  // empty: use the synthetic curve
    Normalization normalization = Normalization::peak;
    std::vector<double> lambdas{3.2, 3.4, 3.6, 3.8, 4.0};
    std::vector<double> curve_lambdas{3.2, 3.6, 4.0};
    double fit_t_min = 1e-2;
    double fit_t_max = 1e2;
    int fit_points_per_decade = 100;
    SyntheticSettings synthetic;
};

struct ScaleSettings {
    double lambda = 3.6;
    double tau_ratio = 3.55;
    double tau_exp_ns = 3.9;
};

/// Everything a run depends on. The JSON form is embedded in every output.
struct RunConfig {
    std::vector<double> lambdas{0.3, 0.65, 1.0, 3.6};
    int state = 1;
    TimeRange times;
    int pole_count = 10;
    std::vector<double> decompose_times{0.5, 1.0, 2.0, 5.0};
    PropagatorConfig propagator;
    ExponentialWindow exponential_window;
    PowerLawWindow powerlaw_window;
    TdseConfig tdse;
    ValidationSettings validation;
    WeightSettings weights;
    std::vector<RegimeRun> table_runs = default_regime_runs();
    CompareSettings compare;
    ScaleSettings scale;
};

json to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::string& path);

} // namespace deltashell::cli
