#pragma once

#include "deltashell/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace deltashell {

struct AbsorberConfig {
    bool enabled = true;
    /// Layer starts at start_fraction * L.
    double start_fraction = 0.7;
    /// W(x) = strength * ((x - x0) / (L - x0))^power in units of hbar^2 / (m a^2).
    double strength = 20.0;
    int power = 3;
};

/// Lengths in units of the well width a, times in m a^2 / hbar. Zero dx / dt
/// select dx = delta / 8 and dt = dx^2.
struct TdseConfig {
    double delta = 0.04;
    double domain_length = 20.0;
    double dx = 0.0;
    double dt = 0.0;
    AbsorberConfig absorber;
    /// Reflection |R|^2 of the absorbing layer at the first resonance momentum
    /// above which evolve() refuses to run.
    double reflection_limit = 1e-5;
    /// Number of norm-ledger samples over the run.
    std::size_t ledger_samples = 200;

    void validate() const;
    double step_x() const { return dx > 0.0 ? dx : delta / 8.0; }
    double step_t() const;
};

/// V(x) = (lambda / 2) (2 pi Delta^2)^{-1/2} exp(-(x - a)^2 / (2 Delta^2)) in
/// units of hbar^2 / (m a^2) (x, Delta in units of a). Integrates to lambda / 2.
double gaussian_barrier(double x, double delta, const ModelParams& params);

struct NormSample {
    double time = 0.0;
    double total = 0.0;  // integral over [0, L]
    double inner = 0.0;  // integral over [0, a]
};

struct TdseSnapshot {
    double time = 0.0;
    std::vector<cplx> values;
};

struct TdseResult {
    double time = 0.0;                  // reached time (reduced)
    double dx = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<double> grid;           // x_j = j dx, j = 0..N (reduced)
    std::vector<cplx> values;           // u(x_j, t), reduced normalization
    std::vector<NormSample> norm_ledger;
    std::vector<TdseSnapshot> snapshots;
    double reflection = 0.0;            // |R|^2 of the absorber at Re k_1
    /// Largest rise of the inner norm between ledger samples (a rising inner
    /// norm late in a decay run signals waves returning from the boundary).
    double max_inner_rise = 0.0;

    /// Value at position x by quadratic interpolation (exact on nodes).
    cplx at(double x) const;
};

/// Crank-Nicolson (Cayley) evolution of u(x, 0) = psi0 on the uniform grid
/// x_j = j dx, with u = 0 at x = 0 and x = L. psi0 must have N + 1 entries.
TdseResult evolve(std::span<const cplx> psi0, double t_final, const TdseConfig& cfg, const ModelParams& params,
                  std::span<const double> snapshot_times = {});

/// Same starting from the well eigenstate sqrt(2) sin(n pi x) on [0, 1].
TdseResult evolve(const InitialState& state, double t_final, const TdseConfig& cfg, const ModelParams& params,
                  std::span<const double> snapshot_times = {});

/// |R|^2 of the discrete absorbing layer (plus hard wall) at momentum k.
double absorber_reflection(double k, const TdseConfig& cfg);

struct Extrapolation {
    double value = 0.0;        // degree-2 least squares at Delta = 0
    double linear_value = 0.0; // degree-1 least squares at Delta = 0
    double error = 0.0;        // |value - linear_value|
    bool monotone = true;      // values monotone in Delta
};

Extrapolation extrapolate_delta(std::span<const double> deltas, std::span<const double> values);

struct TdseValidation {
    double lambda = 0.0;
    double x = 0.0;            // units of a
    double t = 0.0;            // reduced time
    std::vector<double> deltas;
    std::vector<double> observables;  // |psi(x, t)|^2 per Delta (physical, a = 1)
    std::vector<double> reflections;
    Extrapolation extrapolated;
    double contour = 0.0;
    double relative_difference = 0.0;
    /// Final-time field of the smallest Delta.
    std::vector<double> final_grid;
    std::vector<cplx> final_values;
};

/// Runs the Delta ladder (in parallel with jobs > 1), extrapolates to
/// Delta = 0 and compares with the contour representation.
TdseValidation validate_against_contour(const ModelParams& params, const InitialState& state, double x_over_a,
                                        double t, std::span<const double> deltas, const TdseConfig& base = {},
                                        int jobs = 1);

} // namespace deltashell
