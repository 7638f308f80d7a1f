#pragma once

#include <complex>
#include <numbers>

namespace deltashell {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Delta-shell model: hard wall at x = 0 and a barrier
/// lambda * hbar^2 / (2 m a) * delta(x - a).
///
/// Internally everything runs in reduced units (m = a = hbar = 1); the
/// members below only convert between reduced and physical quantities.
struct ModelParams {
    double lambda = 0.0;
    double mass = 1.0;
    double well_width = 1.0;
    double hbar = 1.0;

    void validate() const;

    /// m a^2 / hbar: physical time corresponding to one reduced time unit.
    double time_scale() const { return mass * well_width * well_width / hbar; }
};

/// Infinite-well eigenstate sqrt(2/a) sin(n pi x / a) used as psi(x, 0).
struct InitialState {
    int mode = 1;

    void validate() const;
    double normalization(const ModelParams& params) const;
    double value(double x, const ModelParams& params) const;
};

// Scattering quantities, physical units (k in 1/length).

/// D(k) = ka + lambda e^{ika} sin(ka).
cplx denominator(cplx k, const ModelParams& params);

/// dD/dk = a (1 + lambda e^{2ika}).
cplx denominator_derivative(cplx k, const ModelParams& params);

/// Dbar(k) = ka + lambda e^{-ika} sin(ka); equals conj(D(k)) for real k.
cplx conjugate_denominator(cplx k, const ModelParams& params);

/// Amplitude of the interior solution A sin(kx). Requires k > 0.
cplx coefficient_a(double k, const ModelParams& params);

/// Reflection amplitude of the outer solution e^{-ikx} + B e^{ikx}. Requires k > 0.
cplx coefficient_b(double k, const ModelParams& params);

inline constexpr double kPoleGuard = 1e-13;

/// W(k) = 4 k^2 a^2 / (D(k) Dbar(k)), the continuation of |A(k)|^2.
/// Throws PoleProximityError when |D(k) Dbar(k)| < guard.
cplx spectral_weight(cplx k, const ModelParams& params, double guard = kPoleGuard);

/// phi(k) = integral_0^a psi_n(x) sin(kx) dx in closed form.
cplx initial_overlap(cplx k, const InitialState& state, const ModelParams& params);

/// tau0 = m (lambda a)^2 / (2 pi^3 hbar). Rejects lambda = 0.
double characteristic_time(const ModelParams& params);

namespace reduced {

// Same quantities in reduced units: kappa = k a, xi = x / a.

cplx denominator(cplx kappa, double lambda);
cplx denominator_derivative(cplx kappa, double lambda);
cplx conjugate_denominator(cplx kappa, double lambda);

/// integral_0^1 sin(n pi xi) sin(kappa xi) d xi, with the removable
/// singularities at kappa = +-n pi handled by a Taylor expansion.
cplx overlap(cplx kappa, int mode);

/// phi(kappa) W(kappa) e^{i kappa}, valid for Im kappa <= 0. Stays bounded
/// deep in the lower half plane where phi and W separately over/underflow.
cplx damped_weight(cplx kappa, double lambda, int mode, double guard = kPoleGuard);

/// e^{-i kappa} sin(kappa xi); bounded by 1 for Im kappa <= 0, 0 <= xi <= 1.
inline cplx damped_sine(cplx kappa, double xi)
{
    return (std::exp(I * kappa * (xi - 1.0)) - std::exp(-I * kappa * (xi + 1.0))) / (2.0 * I);
}

} // namespace reduced

} // namespace deltashell
