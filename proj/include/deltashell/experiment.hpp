#pragma once

#include "deltashell/analysis.hpp"
#include "deltashell/model.hpp"
#include "deltashell/propagator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace deltashell {

enum class Normalization { peak, first };

/// Measured decay curve, times in ns.
struct ExperimentSeries {
    std::vector<double> times_ns;
    std::vector<double> intensities;  // as read, >= 0
    std::vector<double> normalized;   // intensities / reference
    Normalization normalization = Normalization::peak;
    double reference = 1.0;
    std::string label;

    std::size_t size() const { return times_ns.size(); }
    void validate() const;
};

/// Two-column CSV with header `t_ns,intensity`. Rows are checked one by one;
/// errors name the offending line.
ExperimentSeries ingest_decay_csv(const std::string& path, Normalization policy = Normalization::peak);
ExperimentSeries parse_decay_csv(const std::string& text, Normalization policy = Normalization::peak,
                                 const std::string& label = "inline");

/// Builds a series from arrays (same validation as ingestion).
ExperimentSeries make_experiment(std::vector<double> times_ns, std::vector<double> intensities,
                                 Normalization policy = Normalization::peak, std::string label = "synthetic");

std::string format_decay_csv(const ExperimentSeries& series);

struct ScanConfig {
    PropagatorConfig propagator;
    ExponentialWindow window;
    /// Model series used for the lifetime fit, in units of tau0.
    double fit_t_min = 1e-2;
    double fit_t_max = 1e2;
    std::size_t fit_points_per_decade = 100;
    /// Lambdas whose model curves are returned alongside the scan.
    std::vector<double> curve_lambdas{3.2, 3.6, 4.0};
    std::size_t curve_points = 400;
    int jobs = 1;
};

struct ScanRow {
    double lambda = 0.0;
    double tau_fit_over_tau0 = 0.0;
    /// Nanoseconds per model time unit tau0 after equating lifetimes.
    double ns_per_tau0 = 0.0;
    double sse = 0.0;  // sum of squared log residuals
    std::size_t points = 0;
};

struct ModelCurve {
    double lambda = 0.0;
    std::vector<double> times_ns;
    std::vector<double> p;
};

struct ScanResult {
    double best_lambda = 0.0;
    double tau_exp_ns = 0.0;
    std::vector<ScanRow> rows;
    std::vector<ModelCurve> curves;
    Normalization normalization = Normalization::peak;
};

/// Equates the fitted model lifetime with the fitted experimental lifetime
/// for each lambda, then scores ln(I) - ln(P(t)) over all points.
ScanResult lambda_scan(const ExperimentSeries& experiment, const std::vector<double>& lambdas,
                       const InitialState& state, const ScanConfig& cfg = {});

/// Model curve P(t) at the given times (ns) with tau_fit mapped to tau_exp_ns,
/// multiplied by (1 + noise * N(0,1)) from a seeded generator. noise = 0
/// gives the clean curve.
ExperimentSeries synthetic_experiment(double lambda, const std::vector<double>& times_ns, double tau_exp_ns,
                                      double noise, std::uint64_t seed, const InitialState& state = {},
                                      const ScanConfig& cfg = {});

/// Physical constants in one consistent unit system.
struct PhysicalConstants {
    double hbar = 1.054571817e-34;        // J s
    double proton_mass = 1.67262192369e-27; // kg
    double bohr_radius = 5.29177210903e-11; // m
    double nanosecond = 1e-9;              // s
};

/// m a^2 = 2 pi^3 hbar / lambda^2 * tau_exp / (tau_th / tau0), in units of m_p a_0^2.
double scale_mapping(double lambda, double tau_th_over_tau0, double tau_exp_ns,
                     const PhysicalConstants& constants = {});

/// Mass number times charge number quoted next to the mapping result.
inline constexpr double kMassChargeProduct = 479.0 * 254.0;

} // namespace deltashell
