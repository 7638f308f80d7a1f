#include "deltashell/model.hpp"

#include "deltashell/errors.hpp"

#include <cmath>
#include <string>

namespace deltashell {

void ModelParams::validate() const
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw DomainError("lambda must be a finite number >= 0, got " + std::to_string(lambda));
    if (!(mass > 0.0) || !(well_width > 0.0) || !(hbar > 0.0))
        throw DomainError("mass, well_width and hbar must be positive");
}

void InitialState::validate() const
{
    if (mode < 1)
        throw DomainError("initial state mode index must be >= 1, got " + std::to_string(mode));
}

double InitialState::normalization(const ModelParams& params) const
{
    return std::sqrt(2.0 / params.well_width);
}

double InitialState::value(double x, const ModelParams& params) const
{
    if (x < 0.0 || x > params.well_width)
        return 0.0;
    return normalization(params) * std::sin(mode * pi * x / params.well_width);
}

namespace reduced {

namespace {

// (e^z - 1) / z without cancellation near z = 0.
cplx expm1_over(cplx z)
{
    if (std::abs(z) < 1e-3)
        return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
    return (std::exp(z) - 1.0) / z;
}

cplx sinc_taylor(cplx d)
{
    const cplx d2 = d * d;
    return 1.0 - d2 / 6.0 + d2 * d2 / 120.0;
}

constexpr double kTaylorRadius = 1e-4;

} // namespace

cplx denominator(cplx kappa, double lambda)
{
    return kappa + lambda * std::exp(I * kappa) * std::sin(kappa);
}

cplx denominator_derivative(cplx kappa, double lambda)
{
    return 1.0 + lambda * std::exp(2.0 * I * kappa);
}

cplx conjugate_denominator(cplx kappa, double lambda)
{
    return kappa + lambda * std::exp(-I * kappa) * std::sin(kappa);
}

cplx overlap(cplx kappa, int mode)
{
    // phi is odd in kappa; evaluate on the right half plane.
    if (kappa.real() < 0.0)
        return -overlap(-kappa, mode);
    const double npi = mode * pi;
    const cplx delta = kappa - npi;
    if (std::abs(delta) < kTaylorRadius)
        return npi * sinc_taylor(delta) / (2.0 * npi + delta);
    return npi * std::sin(delta) / (delta * (2.0 * npi + delta));
}

cplx damped_weight(cplx kappa, double lambda, int mode, double guard)
{
    const double npi = mode * pi;
    const cplx q = std::exp(-2.0 * I * kappa);

    // phi(kappa) e^{-i kappa}
    cplx phi_damped;
    const cplx delta = kappa - npi;
    if (std::abs(delta) < kTaylorRadius)
        phi_damped = npi * sinc_taylor(delta) / (2.0 * npi + delta) * std::exp(-I * kappa);
    else if (std::abs(kappa + npi) < kTaylorRadius)
        phi_damped = overlap(kappa, mode) * std::exp(-I * kappa);
    else
        phi_damped = (mode % 2 == 0 ? 1.0 : -1.0) * npi * (1.0 - q) / (2.0 * I) /
                     (delta * (2.0 * npi + delta));

    // D / kappa = q^{-1} (q + lambda g), Dbar / kappa = 1 + lambda g, g = (1 - q) / (2 i kappa).
    const cplx g = expm1_over(-2.0 * I * kappa);
    const cplx scaled_d = q + lambda * g;
    const cplx dbar = 1.0 + lambda * g;

    const double kabs = std::abs(kappa);
    if (kabs > 0.0) {
        const double abs_d = kabs * std::abs(scaled_d) / std::abs(q);
        const double abs_dbar = kabs * std::abs(dbar);
        if (abs_d < guard || abs_dbar < guard)
            throw PoleProximityError("spectral weight evaluated within guard of a pole");
    }
    return phi_damped * 4.0 / (scaled_d * dbar);
}

} // namespace reduced

cplx denominator(cplx k, const ModelParams& params)
{
    return reduced::denominator(k * params.well_width, params.lambda);
}

cplx denominator_derivative(cplx k, const ModelParams& params)
{
    return params.well_width * reduced::denominator_derivative(k * params.well_width, params.lambda);
}

cplx conjugate_denominator(cplx k, const ModelParams& params)
{
    return reduced::conjugate_denominator(k * params.well_width, params.lambda);
}

cplx coefficient_a(double k, const ModelParams& params)
{
    if (!(k > 0.0))
        throw DomainError("coefficient_a requires a real momentum k > 0");
    const double ka = k * params.well_width;
    return -2.0 * I * ka / reduced::denominator(ka, params.lambda);
}

cplx coefficient_b(double k, const ModelParams& params)
{
    if (!(k > 0.0))
        throw DomainError("coefficient_b requires a real momentum k > 0");
    const double ka = k * params.well_width;
    return -reduced::conjugate_denominator(ka, params.lambda) / reduced::denominator(ka, params.lambda);
}

cplx spectral_weight(cplx k, const ModelParams& params, double guard)
{
    const cplx kappa = k * params.well_width;
    const double lambda = params.lambda;
    // W = 4 / ((D / kappa)(Dbar / kappa)), regular at kappa = 0.
    const cplx d = 1.0 + lambda * reduced::expm1_over(2.0 * I * kappa);
    const cplx dbar = 1.0 + lambda * reduced::expm1_over(-2.0 * I * kappa);
    const double kabs = std::abs(kappa);
    if (kabs > 0.0 && (kabs * std::abs(d) < guard || kabs * std::abs(dbar) < guard))
        throw PoleProximityError("spectral weight evaluated within guard of a pole");
    return 4.0 / (d * dbar);
}

cplx initial_overlap(cplx k, const InitialState& state, const ModelParams& params)
{
    state.validate();
    return std::sqrt(2.0 * params.well_width) * reduced::overlap(k * params.well_width, state.mode);
}

double characteristic_time(const ModelParams& params)
{
    params.validate();
    if (params.lambda == 0.0)
        throw DomainError("characteristic time is undefined for lambda = 0");
    const double la = params.lambda * params.well_width;
    return params.mass * la * la / (2.0 * pi * pi * pi * params.hbar);
}

} // namespace deltashell
