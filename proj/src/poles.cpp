#include "deltashell/poles.hpp"

#include "deltashell/errors.hpp"
#include "deltashell/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace deltashell {

namespace {

constexpr double kArgStep = pi / 4.0;
constexpr int kMaxBisection = 48;

double arg_change(cplx from, cplx to)
{
    return std::arg(to / from);
}

// Accumulated arg D along the straight segment z0 -> z1, refined until
// neighbouring samples differ by less than kArgStep.
double wind_segment(double lambda, cplx z0, cplx z1, cplx d0, cplx d1, int depth)
{
    const double step = arg_change(d0, d1);
    if (std::abs(step) < kArgStep && depth > 0)
        return step;
    if (depth > kMaxBisection)
        throw ConvergenceError("argument principle: winding not resolved along contour edge");
    const cplx zm = 0.5 * (z0 + z1);
    const cplx dm = reduced::denominator(zm, lambda);
    if (std::abs(dm) < 1e-14)
        throw ConvergenceError("argument principle: contour passes through a zero of D");
    return wind_segment(lambda, z0, zm, d0, dm, depth + 1) + wind_segment(lambda, zm, z1, dm, d1, depth + 1);
}

double wind_edge(double lambda, cplx from, cplx to)
{
    // Coarse pre-sampling keeps aliasing away on long edges: D oscillates
    // with period pi along the real direction.
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(to - from) / 0.1)));
    double total = 0.0;
    cplx z0 = from;
    cplx d0 = reduced::denominator(z0, lambda);
    for (int i = 1; i <= pieces; ++i) {
        const cplx z1 = from + (to - from) * (static_cast<double>(i) / pieces);
        const cplx d1 = reduced::denominator(z1, lambda);
        if (std::abs(d1) < 1e-14 || std::abs(d0) < 1e-14)
            throw ConvergenceError("argument principle: contour passes through a zero of D");
        total += wind_segment(lambda, z0, z1, d0, d1, 0);
        z0 = z1;
        d0 = d1;
    }
    return total;
}

// |D| cannot drop below |D'| times the rounding of kappa itself; far out in
// the pole sequence that floor exceeds the nominal tolerance.
double residual_tolerance(double base, cplx kappa, double lambda)
{
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(kappa)) *
                         std::abs(reduced::denominator_derivative(kappa, lambda));
    return std::max(base, floor);
}

std::optional<cplx> newton(cplx kappa, double lambda, double tol, int max_iter)
{
    for (int it = 0; it < max_iter; ++it) {
        const cplx d = reduced::denominator(kappa, lambda);
        const cplx dp = reduced::denominator_derivative(kappa, lambda);
        if (std::abs(dp) == 0.0 || !std::isfinite(std::abs(d)))
            return std::nullopt;
        const cplx step = d / dp;
        kappa -= step;
        if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(kappa))) {
            if (std::abs(reduced::denominator(kappa, lambda)) <= residual_tolerance(tol, kappa, lambda))
                return kappa;
        }
    }
    const double res = std::abs(reduced::denominator(kappa, lambda));
    if (res <= residual_tolerance(tol, kappa, lambda))
        return kappa;
    return std::nullopt;
}

bool in_bracket(cplx kappa, int n)
{
    return kappa.imag() < 0.0 && kappa.real() > (n - 1) * pi && kappa.real() < n * pi + pi / 2.0;
}

double search_depth(int n, double lambda)
{
    return 0.5 * std::log(2.0 * (n + 1) * pi / lambda + 1.0) + 2.0;
}

// Minimum of |D| / |kappa| on a grid over the n-th bracket strip.
cplx grid_scan_seed(int n, double lambda)
{
    const double re_lo = (n - 1) * pi + 0.05;
    const double re_hi = n * pi + pi / 2.0;
    const double depth = search_depth(n, lambda);
    const double h = 0.025;
    cplx best{};
    double best_val = std::numeric_limits<double>::infinity();
    for (double re = re_lo; re < re_hi; re += h) {
        for (double im = -h; im > -depth; im -= h) {
            const cplx z{re, im};
            const double v = std::abs(reduced::denominator(z, lambda)) / std::abs(z);
            if (v < best_val) {
                best_val = v;
                best = z;
            }
        }
    }
    return best;
}

cplx locate(int n, double lambda, const PoleSearchOptions& options)
{
    if (options.seeds == SeedStrategy::asymptotic) {
        const cplx seed = asymptotic_pole(n, lambda);
        if (auto root = newton(seed, lambda, options.residual_tol, options.max_newton); root && in_bracket(*root, n))
            return *root;
    } else {
        const cplx seed{n * pi * lambda / (lambda + 1.0), -0.5 / (1.0 + lambda)};
        if (auto root = newton(seed, lambda, options.residual_tol, options.max_newton); root && in_bracket(*root, n))
            return *root;
    }
    const cplx seed = grid_scan_seed(n, lambda);
    if (auto root = newton(seed, lambda, options.residual_tol, options.max_newton); root && in_bracket(*root, n))
        return *root;
    throw ConvergenceError("pole search: Newton iteration failed for pole " + std::to_string(n));
}

} // namespace

cplx asymptotic_pole(int n, double lambda, int iterations)
{
    // D = 0  <=>  e^{2 i kappa} = 1 - 2 i kappa / lambda.
    cplx kappa{n * pi, -0.5 * std::log(2.0 * n * pi / lambda + 1.0)};
    for (int i = 0; i < iterations; ++i)
        kappa = n * pi - 0.5 * I * std::log(1.0 - 2.0 * I * kappa / lambda);
    return kappa;
}

int count_zeros(double lambda, double re_lo, double re_hi, double im_lo, double im_hi)
{
    const cplx c0{re_lo, im_lo}, c1{re_hi, im_lo}, c2{re_hi, im_hi}, c3{re_lo, im_hi};
    const double total = wind_edge(lambda, c0, c1) + wind_edge(lambda, c1, c2) + wind_edge(lambda, c2, c3) +
                         wind_edge(lambda, c3, c0);
    const double turns = total / (2.0 * pi);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 1e-6)
        throw ConvergenceError("argument principle: non-integer winding number");
    return static_cast<int>(rounded);
}

Pole make_pole(int index, cplx kappa, const ModelParams& params)
{
    Pole p;
    p.index = index;
    p.momentum = kappa / params.well_width;
    const cplx k2 = p.momentum * p.momentum;
    const double h2m = params.hbar * params.hbar / params.mass;
    p.energy = 0.5 * h2m * k2;
    p.width = -h2m * k2.imag();
    p.lifetime = params.hbar / p.width;
    p.q_value = -p.energy.real() / (2.0 * p.energy.imag());
    p.residual = std::abs(reduced::denominator(kappa, params.lambda));
    p.poorly_formed = p.q_value < 0.5;
    return p;
}

void extend_poles(const ModelParams& params, std::vector<Pole>& poles, int n_max, const PoleSearchOptions& options)
{
    params.validate();
    if (!(params.lambda > 0.0))
        throw DomainError("pole search requires lambda > 0");
    if (n_max < 1)
        throw DomainError("pole search requires n_max >= 1");
    const double lambda = params.lambda;
    const std::size_t first = poles.size();
    if (static_cast<int>(first) >= n_max)
        return;

    std::vector<cplx> roots;
    roots.reserve(static_cast<std::size_t>(n_max));
    for (const auto& p : poles)
        roots.push_back(p.momentum * params.well_width);
    for (int n = static_cast<int>(first) + 1; n <= n_max; ++n) {
        const cplx r = locate(n, lambda, options);
        if (!roots.empty() && !(r.real() > roots.back().real() + 1e-8))
            throw ConvergenceError("pole search: pole " + std::to_string(n) + " duplicates or precedes its neighbour");
        roots.push_back(r);
    }

    poles.reserve(roots.size());
    for (std::size_t i = first; i < roots.size(); ++i) {
        Pole p = make_pole(static_cast<int>(i) + 1, roots[i], params);
        if (options.certify) {
            const double left_gap = i == 0 ? roots[i].real() : roots[i].real() - roots[i - 1].real();
            const double next_re = i + 1 < roots.size() ? roots[i + 1].real()
                                                        : asymptotic_pole(static_cast<int>(i) + 2, lambda).real();
            const double right_gap = next_re - roots[i].real();
            const double lo = roots[i].real() - std::min(0.5 * left_gap, pi / 2.0);
            const double hi = roots[i].real() + std::min(0.5 * right_gap, pi / 2.0);
            const int count = count_zeros(lambda, lo, hi, roots[i].imag() - 1.0, 0.0);
            if (count != 1)
                throw ConvergenceError("pole " + std::to_string(i + 1) + " failed argument-principle certification (" +
                                       std::to_string(count) + " zeros in its rectangle)");
            p.certified = true;
        }
        poles.push_back(p);
    }
}

std::vector<Pole> find_poles(const ModelParams& params, int n_max, const PoleSearchOptions& options)
{
    std::vector<Pole> poles;
    extend_poles(params, poles, n_max, options);
    return poles;
}

cplx residue_coefficient(cplx kappa, double lambda, int mode)
{
    const cplx dbar = reduced::conjugate_denominator(kappa, lambda);
    if (std::abs(dbar) < 1e-10)
        throw PoleProximityError("residue: Dbar vanishes at the pole (double pole)");
    const cplx dp = reduced::denominator_derivative(kappa, lambda);
    return -I * reduced::overlap(kappa, mode) * 4.0 * kappa * kappa / (dp * dbar);
}

cplx residue_amplitude(const Pole& pole, double x, const InitialState& state, const ModelParams& params)
{
    state.validate();
    if (x < 0.0 || x > params.well_width)
        throw DomainError("residue_amplitude: x must lie in [0, a]");
    const cplx kappa = pole.momentum * params.well_width;
    const double xi = x / params.well_width;
    return state.normalization(params) * residue_coefficient(kappa, params.lambda, state.mode) *
           std::sin(kappa * xi);
}

PoleWeight pole_weight(const Pole& pole, const InitialState& state, const ModelParams& params, int intervals)
{
    state.validate();
    const cplx kappa = pole.momentum * params.well_width;
    const cplx coef = residue_coefficient(kappa, params.lambda, state.mode);
    const auto n = static_cast<std::size_t>(intervals) + 1;
    const auto w = quad::trapezoid_weights(n, 1.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = static_cast<double>(j) / intervals;
        sum += w[j] * std::norm(coef * std::sin(kappa * xi));
    }
    // |sqrt(2/a)|^2 * a = 2
    return PoleWeight{pole.index, 2.0 * sum};
}

double q_value(const Pole& pole)
{
    return -pole.energy.real() / (2.0 * pole.energy.imag());
}

double lifetime_from_pole(const Pole& pole, const ModelParams& params)
{
    return params.hbar / pole.width;
}

} // namespace deltashell
