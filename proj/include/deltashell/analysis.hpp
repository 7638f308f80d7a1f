#pragma once

#include "deltashell/poles.hpp"
#include "deltashell/propagator.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace deltashell {

enum class FitKind { exponential, power_law };

struct FitResult {
    FitKind kind = FitKind::exponential;
    /// tau (time units of the series) or the exponent n of P = B t^-n.
    double parameter = 0.0;
    /// e^{intercept}: c of c e^{-t/tau}, or B.
    double amplitude = 0.0;
    /// 1-sigma of `parameter` from the log-space regression.
    double uncertainty = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    /// rms of the log-space residuals.
    double residual_rms = 0.0;
    std::size_t points = 0;
    int iterations = 0;
};

struct ExponentialWindow {
    enum class Policy {
        /// Points with band_lo <= P <= band_hi, up to the first drop below band_lo.
        probability_band,
        /// Start at zeno_fraction * tau, stop where P leaves the provisional fit
        /// by more than `deviation`; iterate tau to a fixed point.
        deviation,
    };
    Policy policy = Policy::probability_band;
    double band_hi = 0.9;
    double band_lo = 0.3;
    double zeno_fraction = 0.2;
    double deviation = 0.02;
    int max_iterations = 5;
    std::size_t min_points = 10;
};

struct PowerLawWindow {
    /// Local log-log slopes in the window stay within this of the final slope.
    double slope_tolerance = 0.05;
    /// Minimum window length in decades of t.
    double min_decades = 0.5;
    std::size_t min_points = 10;
    double t_min = 0.0;
    double t_max = std::numeric_limits<double>::infinity();
};

/// Ordinary least squares y = intercept + slope x with 1-sigma slope error.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_sigma = 0.0;
    double residual_rms = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Centered d ln y / d ln x at interior points (end points use one-sided
/// differences). Requires x > 0, y > 0.
std::vector<double> local_loglog_slopes(std::span<const double> x, std::span<const double> y);

FitResult fit_exponential(std::span<const double> t, std::span<const double> p, const ExponentialWindow& window = {});
FitResult fit_exponential(const SurvivalSeries& series, const ExponentialWindow& window = {});

FitResult fit_powerlaw(std::span<const double> t, std::span<const double> p, const PowerLawWindow& window = {});
FitResult fit_powerlaw(const SurvivalSeries& series, const PowerLawWindow& window = {});

struct Breakdown {
    /// Crossing of c e^{-t/tau} and B t^-n.
    double intersection = 0.0;
    bool intersection_found = false;
    /// First time after the exponential window end where P exceeds the
    /// exponential fit by `deviation` (relative).
    double deviation_time = 0.0;
    bool deviation_found = false;
    double p_at_deviation = 0.0;
    /// P at the start of the power-law window.
    double p_at_powerlaw_entry = 0.0;
};

Breakdown measure_breakdown(std::span<const double> t, std::span<const double> p, const FitResult& exp_fit,
                            const FitResult& pow_fit, double deviation = 0.05);
Breakdown measure_breakdown(const SurvivalSeries& series, const FitResult& exp_fit, const FitResult& pow_fit,
                            double deviation = 0.05);

struct OscillationReport {
    int count = 0;                      // sign changes of the discrete dP
    std::vector<double> extrema_times;  // midpoint times of the sign changes
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;             // samples inside [t_lo, t_hi]
    bool resolved = false;              // at least 50 samples in the window
};

/// Sign changes of P_{i+1} - P_i between the end of the exponential window
/// and the start of the power-law window. Differences smaller than
/// 3 * max(err_i, err_{i+1}) are treated as noise and skipped.
OscillationReport detect_oscillations(std::span<const double> t, std::span<const double> p,
                                      std::span<const double> err, double t_lo, double t_hi);
OscillationReport detect_oscillations(const SurvivalSeries& series, const FitResult& exp_fit,
                                      const FitResult& pow_fit);
/// Same with default fit windows; when no power-law window is found the
/// scan runs to the end of the series.
OscillationReport detect_oscillations(const SurvivalSeries& series);

struct RegimeReport {
    double lambda = 0.0;
    double tau0 = 0.0;
    FitResult exponential;
    FitResult power_law;
    bool power_law_found = false;
    double tau_fit = 0.0;
    double tau_pole = 0.0;
    /// |tau_fit - tau_pole| relative to mean(tau_fit, tau_pole), in percent.
    double discrepancy_pct = 0.0;
    /// Same difference relative to tau_fit.
    double discrepancy_vs_fit_pct = 0.0;
    double q_value = 0.0;
    Breakdown breakdown;
    /// 10 (hbar / Gamma_1) ln(lambda); NaN for lambda <= 1.
    double breakdown_estimate = std::numeric_limits<double>::quiet_NaN();
    OscillationReport oscillations;
};

RegimeReport regime_report(const SurvivalSeries& series, const Pole& first_pole,
                           const ExponentialWindow& exp_window = {}, const PowerLawWindow& pow_window = {});

} // namespace deltashell
