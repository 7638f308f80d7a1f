#pragma once

#include "deltashell/model.hpp"
#include "deltashell/poles.hpp"

#include <cstddef>
#include <shared_mutex>
#include <span>
#include <tuple>
#include <vector>

namespace deltashell {

struct QuadratureConfig {
    /// Absolute error target for each reduced wavefunction value.
    double abs_tol = 1e-8;
    /// Relative error target (against the largest value on the grid).
    double rel_tol = 1e-10;
    /// The rotated ray is cut where exp(-s^2 t / 2) < exp(-damping_exponent).
    double damping_exponent = 37.0;
    std::size_t max_panels = 400000;
};

struct PoleSumConfig {
    /// Fixed number of poles; 0 selects the count from the tail bound.
    int pole_count = 0;
    int min_poles = 10;
    /// Sup-norm bound on the omitted pole terms (reduced units).
    double tail_tol = 1e-13;
    int max_poles = 1000000;
};

enum class SpatialRule { trapezoid, simpson };

struct PropagatorConfig {
    QuadratureConfig quadrature;
    PoleSumConfig poles;
    /// The interior grid has grid_intervals + 1 equally spaced nodes on [0, a].
    int grid_intervals = 100;
    SpatialRule rule = SpatialRule::trapezoid;
};

enum class WaveMethod { direct, contour, poles_only, background_only };

struct WaveField {
    double time = 0.0;
    std::vector<double> grid;   // positions x_i (physical)
    std::vector<cplx> values;   // psi(x_i, t) (physical, 1/sqrt(length))
    WaveMethod method = WaveMethod::contour;
    double error_estimate = 0.0;
};

struct SurvivalPoint {
    double time = 0.0;
    double p_total = 0.0;
    double p_bg = 0.0;
    double p_poles = 0.0;
    double p_interf = 0.0;
    double err_est = 0.0;
};

struct SurvivalSeries {
    ModelParams params;
    InitialState state;
    PropagatorConfig config;
    /// Poles in the table after the sweep (the most any time needed).
    int pole_count = 0;
    std::vector<double> times;
    std::vector<double> p_total, p_bg, p_poles, p_interf, err_est;

    std::size_t size() const { return times.size(); }
    void push_back(const SurvivalPoint& p);
    SurvivalPoint row(std::size_t i) const;
    void validate() const;
};

/// Wavefunction inside the well from the continuum representation and
/// from its contour-rotated form (background ray integral plus pole sum).
///
/// The pole table grows on demand behind a reader/writer lock, so one
/// instance may be shared across threads. prepare(t_min) grows it up front.
class Propagator {
public:
    Propagator(ModelParams params, InitialState state, PropagatorConfig config = {});

    const ModelParams& params() const { return params_; }
    const InitialState& state() const { return state_; }
    const PropagatorConfig& config() const { return config_; }

    /// Extends the pole table so that pole sums converge for every t >= t_min.
    void prepare(double t_min);
    /// Ensures the first n poles are available.
    void prepare_count(int n);
    /// Snapshot of the current pole table.
    std::vector<Pole> poles() const;

    std::vector<double> grid() const;

    // The span overloads return physical psi values at positions x.
    std::vector<cplx> direct(std::span<const double> x, double t, double* error = nullptr) const;
    std::vector<cplx> background(std::span<const double> x, double t, double* error = nullptr) const;
    std::vector<cplx> pole_sum(std::span<const double> x, double t, double* error = nullptr) const;

    WaveField wave(double t, WaveMethod method) const;

    SurvivalPoint survival(double t) const;

private:
    struct PoleTerm {
        cplx kappa;        // reduced momentum
        cplx coefficient;  // sqrt(2) * residue coefficient (reduced)
        double bound;      // sup over xi of |coefficient sin(kappa xi)|
        bool in_sector;    // between the real axis and the rotated ray
    };

    double reduced_time(double t) const { return t / params_.time_scale(); }
    void ensure_terms(int n) const;
    int required_poles(double tau) const;
    double tail_bound(int n, double tau) const;
    void check_x(std::span<const double> x) const;

    // Reduced-unit kernels; xi in [0, 1], values are u = sqrt(a) psi.
    std::vector<cplx> background_reduced(std::span<const double> xi, double tau, double& error) const;
    std::vector<cplx> background_grid(double tau, double& error) const;
    std::vector<cplx> poles_reduced(std::span<const double> xi, double tau, double& error) const;
    std::vector<cplx> poles_grid(double tau, double& error) const;
    std::vector<cplx> direct_reduced(std::span<const double> xi, double tau, double& error) const;
    double integrate_x(std::span<const cplx> a, std::span<const cplx> b) const;

    ModelParams params_;
    InitialState state_;
    PropagatorConfig config_;
    std::vector<double> grid_xi_;
    std::vector<double> x_weights_;

    mutable std::shared_mutex mutex_;
    mutable std::vector<PoleTerm> terms_;
    mutable std::vector<Pole> poles_;
};

// Free-function entry points. Each builds a Propagator for one call; use the
// class directly for sweeps.

cplx wavefunction_direct(double x, double t, const InitialState& state, const ModelParams& params,
                         const QuadratureConfig& cfg = {});
cplx background_wave(double x, double t, const InitialState& state, const ModelParams& params,
                     const QuadratureConfig& cfg = {});
cplx pole_wave(double x, double t, const InitialState& state, const ModelParams& params, int pole_count);

SurvivalPoint survival(double t, const InitialState& state, const ModelParams& params,
                       const PropagatorConfig& cfg = {});

/// (p_bg, p_poles, p_interf) at t > 0 from shared fields.
std::tuple<double, double, double> survival_decomposition(double t, const InitialState& state,
                                                          const ModelParams& params,
                                                          const PropagatorConfig& cfg = {});

/// Survival series on the given times; jobs > 1 fans out over threads.
SurvivalSeries compute_survival_series(const ModelParams& params, const InitialState& state,
                                       std::span<const double> times, const PropagatorConfig& cfg = {},
                                       int jobs = 1);

/// n log-spaced times between t_lo and t_hi inclusive.
std::vector<double> log_times(double t_lo, double t_hi, std::size_t n);

/// Scaling estimate m^3 a^6 / (hbar^3 lambda^4 t^3) of the late-time background.
double background_asymptote(double t, const ModelParams& params);

/// 10 (hbar / Gamma_1) ln(lambda); order-of-magnitude estimate, lambda > 1.
double breakdown_estimate(const ModelParams& params, const Pole& first_pole);

} // namespace deltashell
