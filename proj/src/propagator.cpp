#include "deltashell/propagator.hpp"

#include "deltashell/errors.hpp"
#include "deltashell/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace deltashell {

namespace {

const cplx kRay = std::polar(1.0, -pi / 4.0);
constexpr double kInvTwoPi = 1.0 / (2.0 * pi);
const double kSqrt2 = std::sqrt(2.0);

bool is_uniform_grid(std::span<const double> xi, const std::vector<double>& grid)
{
    return xi.data() == grid.data() && xi.size() == grid.size();
}

// out_j = e^{-i kappa} sin(kappa xi_j). On the uniform grid the exponentials
// come from a two-term recurrence.
void fill_damped_sines(cplx kappa, std::span<const double> xi, bool uniform, std::span<cplx> out)
{
    const std::size_t n = xi.size();
    if (!uniform || n < 2) {
        for (std::size_t j = 0; j < n; ++j)
            out[j] = reduced::damped_sine(kappa, xi[j]);
        return;
    }
    const double h = xi[1] - xi[0];
    const cplx up = std::exp(I * kappa * h);
    const cplx down = std::exp(-I * kappa * h);
    cplx a = std::exp(-I * kappa);  // e^{i kappa (xi - 1)}
    cplx b = a;                     // e^{-i kappa (xi + 1)}
    const cplx half_over_i = 1.0 / (2.0 * I);
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = (a - b) * half_over_i;
        a *= up;
        b *= down;
    }
    out[0] = 0.0;
}

// sin(kappa xi_j), same recurrence.
void fill_sines(cplx kappa, std::span<const double> xi, bool uniform, std::span<cplx> out)
{
    const std::size_t n = xi.size();
    if (!uniform || n < 2) {
        for (std::size_t j = 0; j < n; ++j)
            out[j] = std::sin(kappa * xi[j]);
        return;
    }
    const double h = xi[1] - xi[0];
    const cplx up = std::exp(I * kappa * h);
    const cplx down = std::exp(-I * kappa * h);
    cplx a = 1.0, b = 1.0;
    const cplx half_over_i = 1.0 / (2.0 * I);
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = (a - b) * half_over_i;
        a *= up;
        b *= down;
    }
    out[0] = 0.0;
}

// Magnitude bound on the real-axis integrand (reduced units) at s >= K.
double real_axis_envelope(double s, double lambda, int mode)
{
    const double npi = mode * pi;
    const double w = s > lambda ? 4.0 * s * s / ((s - lambda) * (s - lambda)) : 4.0;
    return kSqrt2 * kInvTwoPi * npi * w / (s * s - npi * npi);
}

} // namespace

// ---------------------------------------------------------------- series

void SurvivalSeries::push_back(const SurvivalPoint& p)
{
    times.push_back(p.time);
    p_total.push_back(p.p_total);
    p_bg.push_back(p.p_bg);
    p_poles.push_back(p.p_poles);
    p_interf.push_back(p.p_interf);
    err_est.push_back(p.err_est);
}

SurvivalPoint SurvivalSeries::row(std::size_t i) const
{
    return SurvivalPoint{times.at(i), p_total.at(i), p_bg.at(i), p_poles.at(i), p_interf.at(i), err_est.at(i)};
}

void SurvivalSeries::validate() const
{
    const std::size_t n = times.size();
    if (p_total.size() != n || p_bg.size() != n || p_poles.size() != n || p_interf.size() != n ||
        err_est.size() != n)
        throw DataError("survival series: column lengths differ");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0)
            throw DataError("survival series: invalid time at row " + std::to_string(i + 1));
        if (i > 0 && !(times[i] > times[i - 1]))
            throw DataError("survival series: times not strictly increasing at row " + std::to_string(i + 1));
    }
}

// ------------------------------------------------------------ propagator

Propagator::Propagator(ModelParams params, InitialState state, PropagatorConfig config)
    : params_(params), state_(state), config_(config)
{
    params_.validate();
    state_.validate();
    const auto& q = config_.quadrature;
    if (!(q.abs_tol > 0.0) || q.rel_tol < 0.0 || !(q.damping_exponent > 0.0) || q.max_panels < 16)
        throw DomainError("invalid quadrature configuration");
    const auto& pc = config_.poles;
    if (pc.pole_count < 0 || pc.min_poles < 1 || !(pc.tail_tol > 0.0) || pc.max_poles < pc.min_poles)
        throw DomainError("invalid pole-sum configuration");
    if (config_.grid_intervals < 2)
        throw DomainError("grid_intervals must be >= 2");
    if (config_.rule == SpatialRule::simpson && config_.grid_intervals % 2 != 0)
        throw DomainError("Simpson rule needs an even number of grid intervals");

    const auto nodes = static_cast<std::size_t>(config_.grid_intervals) + 1;
    grid_xi_.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j)
        grid_xi_[j] = static_cast<double>(j) / config_.grid_intervals;
    grid_xi_.back() = 1.0;
    x_weights_ = config_.rule == SpatialRule::simpson ? quad::simpson_weights(nodes, 1.0)
                                                      : quad::trapezoid_weights(nodes, 1.0);
}

std::vector<double> Propagator::grid() const
{
    std::vector<double> x(grid_xi_.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = grid_xi_[j] * params_.well_width;
    return x;
}

std::vector<Pole> Propagator::poles() const
{
    std::shared_lock lock(mutex_);
    return poles_;
}

void Propagator::ensure_terms(int n) const
{
    if (params_.lambda == 0.0 || n <= 0)
        return;
    {
        std::shared_lock lock(mutex_);
        if (static_cast<int>(terms_.size()) >= n)
            return;
    }
    std::unique_lock lock(mutex_);
    const int have = static_cast<int>(terms_.size());
    if (have >= n)
        return;
    if (n > config_.poles.max_poles)
        throw ConvergenceError("pole sum needs " + std::to_string(n) + " poles, above max_poles = " +
                               std::to_string(config_.poles.max_poles));
    // Grow geometrically so that sweeps toward small t do not re-certify often.
    const int target = std::min(config_.poles.max_poles, std::max(n, have + have / 4));
    const double lambda = params_.lambda;

    extend_poles(params_, poles_, target);

    // Global count: no zero of D may hide between or below the certified
    // rectangles. k = 0 is a zero of D, hence the left edge at 0.05.
    double depth = 0.0;
    for (const auto& p : poles_)
        depth = std::max(depth, -p.momentum.imag() * params_.well_width);
    const double last = poles_.back().momentum.real() * params_.well_width;
    const double next = asymptotic_pole(target + 1, lambda).real();
    const int counted = count_zeros(lambda, 0.05, 0.5 * (last + next), -(depth + 1.0), 0.0);
    if (counted != target)
        throw ConvergenceError("argument principle counts " + std::to_string(counted) + " zeros, pole search found " +
                               std::to_string(target));

    terms_.reserve(poles_.size());
    for (std::size_t i = terms_.size(); i < poles_.size(); ++i) {
        const cplx kappa = poles_[i].momentum * params_.well_width;
        PoleTerm t;
        t.kappa = kappa;
        t.coefficient = kSqrt2 * residue_coefficient(kappa, lambda, state_.mode);
        t.bound = std::abs(t.coefficient) * std::cosh(kappa.imag());
        t.in_sector = std::arg(kappa) > -pi / 4.0;
        terms_.push_back(t);
    }
}

void Propagator::prepare(double t_min)
{
    if (!(t_min > 0.0))
        throw DomainError("prepare: t_min must be > 0");
    ensure_terms(required_poles(reduced_time(t_min)));
}

void Propagator::prepare_count(int n)
{
    ensure_terms(n);
}

double Propagator::tail_bound(int n, double tau) const
{
    // Bound on sum_{m > n} sup_xi |term_m| from the asymptotic pole positions;
    // the terms decay at least geometrically beyond the first few.
    auto term = [&](int m) {
        const cplx kappa = asymptotic_pole(m, params_.lambda);
        const cplx coef = kSqrt2 * residue_coefficient(kappa, params_.lambda, state_.mode);
        return std::abs(coef) * std::cosh(kappa.imag()) * std::exp(kappa.real() * kappa.imag() * tau);
    };
    const double b1 = term(n + 1);
    if (b1 == 0.0)
        return 0.0;
    const double b2 = term(n + 2);
    const double r = b2 / b1;
    if (!(r < 1.0))
        return std::numeric_limits<double>::infinity();
    return b1 / (1.0 - r);
}

int Propagator::required_poles(double tau) const
{
    if (params_.lambda == 0.0)
        return 0;
    const auto& pc = config_.poles;
    if (pc.pole_count > 0)
        return pc.pole_count;
    if (!(tau > 0.0))
        throw DomainError("pole sum requires t > 0");
    int lo = pc.min_poles;
    if (tail_bound(lo, tau) < pc.tail_tol)
        return lo;
    int hi = lo;
    while (!(tail_bound(hi, tau) < pc.tail_tol)) {
        if (hi >= pc.max_poles)
            throw ConvergenceError("pole sum does not converge within max_poles at t/t_unit = " + std::to_string(tau));
        lo = hi;
        hi = std::min(pc.max_poles, 2 * hi);
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (tail_bound(mid, tau) < pc.tail_tol)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

void Propagator::check_x(std::span<const double> x) const
{
    for (double v : x)
        if (!(v >= 0.0 && v <= params_.well_width))
            throw DomainError("position outside [0, a]: " + std::to_string(v));
}

// u_bg(xi) = e^{-i pi/4} int_0^smax e^{-s^2 tau / 2} f(e^{-i pi/4} s, xi) ds
std::vector<cplx> Propagator::background_reduced(std::span<const double> xi, double tau, double& error) const
{
    if (!(tau > 0.0))
        throw DomainError("background integral requires t > 0");
    const auto& q = config_.quadrature;
    const double lambda = params_.lambda;
    const int mode = state_.mode;
    const bool uniform = is_uniform_grid(xi, grid_xi_);
    const std::size_t dim = xi.size();

    const double s_max = std::sqrt(2.0 * q.damping_exponent / tau);
    const std::size_t pieces = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(s_max / (pi / 2.0))));
    std::vector<double> breaks(pieces + 1);
    for (std::size_t i = 0; i <= pieces; ++i)
        breaks[i] = s_max * static_cast<double>(i) / static_cast<double>(pieces);

    std::vector<cplx> sines(dim);
    auto integrand = [&](double s, std::span<cplx> out) {
        const cplx kappa = kRay * s;
        const cplx g = kSqrt2 * kInvTwoPi * std::exp(-0.5 * s * s * tau) *
                       reduced::damped_weight(kappa, lambda, mode);
        fill_damped_sines(kappa, xi, uniform, sines);
        for (std::size_t j = 0; j < dim; ++j)
            out[j] = g * sines[j];
    };
    auto res = quad::integrate(integrand, breaks, dim, q.abs_tol, q.max_panels, q.rel_tol);
    if (!res.converged)
        throw ConvergenceError("background integral: error estimate " + std::to_string(res.error) +
                               " above tolerance " + std::to_string(res.tolerance));
    for (auto& v : res.value)
        v *= kRay;
    // Truncation at s_max: the integrand is bounded by its prefactor there.
    error = res.error + std::exp(-q.damping_exponent);
    return res.value;
}

std::vector<cplx> Propagator::background_grid(double tau, double& error) const
{
    return background_reduced(grid_xi_, tau, error);
}

// u_poles(xi) = sum_n c_n sin(kappa_n xi) e^{-i kappa_n^2 tau / 2}
std::vector<cplx> Propagator::poles_reduced(std::span<const double> xi, double tau, double& error) const
{
    if (tau < 0.0)
        throw DomainError("pole sum requires t >= 0");
    const std::size_t dim = xi.size();
    std::vector<cplx> out(dim);
    error = 0.0;
    if (params_.lambda == 0.0)
        return out;
    const int n = required_poles(tau);
    ensure_terms(n);
    const bool uniform = is_uniform_grid(xi, grid_xi_);

    std::shared_lock lock(mutex_);
    std::vector<cplx> sines(dim);
    double magnitude = 0.0;
    for (int i = 0; i < n; ++i) {
        const PoleTerm& t = terms_[static_cast<std::size_t>(i)];
        if (!t.in_sector)
            continue;
        const cplx amp = t.coefficient * std::exp(-0.5 * I * t.kappa * t.kappa * tau);
        fill_sines(t.kappa, xi, uniform, sines);
        for (std::size_t j = 0; j < dim; ++j)
            out[j] += amp * sines[j];
        magnitude += t.bound * std::exp(t.kappa.real() * t.kappa.imag() * tau);
    }
    lock.unlock();
    const double tail = (config_.poles.pole_count > 0 && tau == 0.0) ? std::numeric_limits<double>::infinity()
                                                                      : tail_bound(n, tau);
    error = tail + 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
    return out;
}

std::vector<cplx> Propagator::poles_grid(double tau, double& error) const
{
    return poles_reduced(grid_xi_, tau, error);
}

// u(xi) = sqrt(2) / (2 pi) int_0^inf e^{-i s^2 tau / 2} phi(s) W(s) sin(s xi) ds on the real axis.
std::vector<cplx> Propagator::direct_reduced(std::span<const double> xi, double tau, double& error) const
{
    if (tau < 0.0)
        throw DomainError("direct quadrature requires t >= 0");
    const auto& q = config_.quadrature;
    const double lambda = params_.lambda;
    const int mode = state_.mode;
    const double tol = q.abs_tol;
    const std::size_t dim = xi.size();
    const double npi = mode * pi;
    const double k_floor = std::max(2.0 * npi, 2.0 * lambda) + 20.0;
    constexpr double k_cap = 2e6;

    double cutoff = 0.0;
    double tail_error = 0.0;
    if (tau > 0.0) {
        // One integration by parts handles [K, inf); the remainder decays as
        // |g(K)| / (tau K)^2 once the chirp outruns the oscillation of g.
        auto remainder = [&](double k) {
            return real_axis_envelope(k, lambda, mode) * (2.0 + 1.0 / k) / (tau * k * (tau * k - 2.0));
        };
        cutoff = std::max({8.0 / tau, std::pow(4.0 * mode / (tau * tau * tol), 0.25), k_floor});
        while (remainder(cutoff) > 0.25 * tol && cutoff < k_cap)
            cutoff *= 1.25;
        tail_error = remainder(cutoff);
    } else {
        // Without the chirp the tail is bounded through the oscillation of
        // sin(s - n pi) sin(s xi), frequencies 1 -+ xi.
        double xi_max = 0.0;
        for (double v : xi)
            xi_max = std::max(xi_max, v);
        auto tail = [&](double k) {
            const double c = real_axis_envelope(k, lambda, mode) * k * k;
            const double near = xi_max < 1.0 ? std::min(1.0 / (1.0 - xi_max), k) : k;
            return c / (k * k) * (near + 1.0 / (1.0 + xi_max));
        };
        cutoff = std::max(k_floor, std::sqrt(std::max(1.0, 4.0 * 8.0 * mode / tol)));
        cutoff = std::min(cutoff, k_cap);
        while (tail(cutoff) > 0.25 * tol && cutoff < k_cap)
            cutoff = std::min(k_cap, cutoff * 1.25);
        tail_error = tail(cutoff);
    }

    // Panel width <= pi / (8 * phase rate); the phase rate of the integrand
    // is s tau from the chirp plus up to 2 from the sines.
    std::vector<double> breaks{0.0};
    for (double s = 0.0; s < cutoff;) {
        const double w = std::min(0.25, pi / (8.0 * (s * tau + 2.0)));
        s = std::min(cutoff, s + w);
        breaks.push_back(s);
    }
    // Resolve narrow resonances explicitly.
    if (lambda > 0.0) {
        ensure_terms(std::min(20, config_.poles.max_poles));
        std::shared_lock lock(mutex_);
        for (const auto& t : terms_) {
            const double gamma = -t.kappa.imag();
            if (gamma < 0.1 && t.kappa.real() + 8.0 * gamma < cutoff) {
                for (double m : {-8.0, -2.0, -0.5, 0.0, 0.5, 2.0, 8.0})
                    breaks.push_back(t.kappa.real() + m * gamma);
            }
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                     breaks.end());
        breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double b) { return b < 0.0 || b > cutoff; }),
                     breaks.end());
    }

    const bool uniform = is_uniform_grid(xi, grid_xi_);
    std::vector<cplx> sines(dim);
    auto amplitude = [&](double s) {
        return kSqrt2 * kInvTwoPi * reduced::damped_weight(cplx{s, 0.0}, lambda, mode);
    };
    auto integrand = [&](double s, std::span<cplx> out) {
        const cplx g = amplitude(s) * std::exp(cplx{0.0, -0.5 * s * s * tau});
        fill_damped_sines(cplx{s, 0.0}, xi, uniform, sines);
        for (std::size_t j = 0; j < dim; ++j)
            out[j] = g * sines[j];
    };
    const std::size_t max_panels = std::max(q.max_panels, 4 * breaks.size());
    auto res = quad::integrate(integrand, breaks, dim, 0.5 * tol, max_panels, q.rel_tol);

    if (tau > 0.0) {
        const cplx g = amplitude(cutoff) * std::exp(cplx{0.0, -0.5 * cutoff * cutoff * tau}) / (I * tau * cutoff);
        fill_damped_sines(cplx{cutoff, 0.0}, xi, false, sines);
        for (std::size_t j = 0; j < dim; ++j)
            res.value[j] += g * sines[j];
    }
    error = res.error + tail_error;
    if (!res.converged || error > tol)
        throw ConvergenceError("direct quadrature: error estimate " + std::to_string(error) + " above tolerance " +
                               std::to_string(tol) + " (cutoff " + std::to_string(cutoff) + ")");
    return res.value;
}

double Propagator::integrate_x(std::span<const cplx> a, std::span<const cplx> b) const
{
    double sum = 0.0;
    for (std::size_t j = 0; j < x_weights_.size(); ++j)
        sum += x_weights_[j] * (std::conj(a[j]) * b[j]).real();
    return sum;
}

namespace {

std::vector<double> to_reduced(std::span<const double> x, double a)
{
    std::vector<double> xi(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        xi[j] = x[j] / a;
    return xi;
}

std::vector<cplx> to_physical(std::vector<cplx> u, double a, double* error, double reduced_error)
{
    const double scale = 1.0 / std::sqrt(a);
    for (auto& v : u)
        v *= scale;
    if (error)
        *error = reduced_error * scale;
    return u;
}

} // namespace

std::vector<cplx> Propagator::direct(std::span<const double> x, double t, double* error) const
{
    check_x(x);
    if (t < 0.0)
        throw DomainError("t must be >= 0");
    const auto xi = to_reduced(x, params_.well_width);
    double err = 0.0;
    auto u = direct_reduced(xi, reduced_time(t), err);
    return to_physical(std::move(u), params_.well_width, error, err);
}

std::vector<cplx> Propagator::background(std::span<const double> x, double t, double* error) const
{
    check_x(x);
    if (!(t > 0.0))
        throw DomainError("background integral requires t > 0; use the direct route at t = 0");
    const auto xi = to_reduced(x, params_.well_width);
    double err = 0.0;
    auto u = background_reduced(xi, reduced_time(t), err);
    return to_physical(std::move(u), params_.well_width, error, err);
}

std::vector<cplx> Propagator::pole_sum(std::span<const double> x, double t, double* error) const
{
    check_x(x);
    if (t < 0.0 || (t == 0.0 && config_.poles.pole_count == 0))
        throw DomainError("adaptive pole sum requires t > 0");
    const auto xi = to_reduced(x, params_.well_width);
    double err = 0.0;
    auto u = poles_reduced(xi, reduced_time(t), err);
    return to_physical(std::move(u), params_.well_width, error, err);
}

WaveField Propagator::wave(double t, WaveMethod method) const
{
    if (t < 0.0)
        throw DomainError("t must be >= 0");
    WaveField field;
    field.time = t;
    field.grid = grid();
    field.method = method;
    const double tau = reduced_time(t);
    double err = 0.0;
    std::vector<cplx> u;
    switch (method) {
    case WaveMethod::direct:
        u = direct_reduced(grid_xi_, tau, err);
        break;
    case WaveMethod::contour:
        if (t == 0.0) {
            u.resize(grid_xi_.size());
            for (std::size_t j = 0; j < u.size(); ++j)
                u[j] = kSqrt2 * std::sin(state_.mode * pi * grid_xi_[j]);
        } else {
            double e1 = 0.0, e2 = 0.0;
            u = background_grid(tau, e1);
            const auto p = poles_grid(tau, e2);
            for (std::size_t j = 0; j < u.size(); ++j)
                u[j] += p[j];
            err = e1 + e2;
        }
        break;
    case WaveMethod::background_only:
        if (t == 0.0)
            throw DomainError("background integral requires t > 0");
        u = background_grid(tau, err);
        break;
    case WaveMethod::poles_only:
        if (t == 0.0 && config_.poles.pole_count == 0)
            throw DomainError("adaptive pole sum requires t > 0");
        u = poles_grid(tau, err);
        break;
    }
    u.front() = 0.0;
    field.values = to_physical(std::move(u), params_.well_width, &field.error_estimate, err);
    return field;
}

SurvivalPoint Propagator::survival(double t) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("survival requires t >= 0");
    SurvivalPoint p;
    p.time = t;
    if (t == 0.0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        p.p_total = 1.0;
        p.p_bg = p.p_poles = p.p_interf = nan;
        p.err_est = 0.0;
        return p;
    }
    const double tau = reduced_time(t);
    double e_bg = 0.0, e_p = 0.0;
    const auto bg = background_grid(tau, e_bg);
    const auto pl = poles_grid(tau, e_p);
    std::vector<cplx> total(bg.size());
    for (std::size_t j = 0; j < bg.size(); ++j)
        total[j] = bg[j] + pl[j];
    p.p_bg = integrate_x(bg, bg);
    p.p_poles = integrate_x(pl, pl);
    p.p_interf = 2.0 * integrate_x(bg, pl);
    p.p_total = integrate_x(total, total);
    const double d = e_bg + e_p;
    p.err_est = 2.0 * std::sqrt(std::max(p.p_total, 0.0)) * d + d * d;
    return p;
}

// ---------------------------------------------------------- free functions

cplx wavefunction_direct(double x, double t, const InitialState& state, const ModelParams& params,
                         const QuadratureConfig& cfg)
{
    PropagatorConfig pc;
    pc.quadrature = cfg;
    Propagator prop(params, state, pc);
    const double xs[] = {x};
    return prop.direct(xs, t).front();
}

cplx background_wave(double x, double t, const InitialState& state, const ModelParams& params,
                     const QuadratureConfig& cfg)
{
    PropagatorConfig pc;
    pc.quadrature = cfg;
    Propagator prop(params, state, pc);
    const double xs[] = {x};
    return prop.background(xs, t).front();
}

cplx pole_wave(double x, double t, const InitialState& state, const ModelParams& params, int pole_count)
{
    PropagatorConfig pc;
    pc.poles.pole_count = pole_count;
    pc.poles.min_poles = std::max(1, std::min(pc.poles.min_poles, pole_count));
    Propagator prop(params, state, pc);
    const double xs[] = {x};
    return prop.pole_sum(xs, t).front();
}

SurvivalPoint survival(double t, const InitialState& state, const ModelParams& params, const PropagatorConfig& cfg)
{
    return Propagator(params, state, cfg).survival(t);
}

std::tuple<double, double, double> survival_decomposition(double t, const InitialState& state,
                                                          const ModelParams& params, const PropagatorConfig& cfg)
{
    if (!(t > 0.0))
        throw DomainError("survival decomposition requires t > 0");
    const auto p = survival(t, state, params, cfg);
    return {p.p_bg, p.p_poles, p.p_interf};
}

SurvivalSeries compute_survival_series(const ModelParams& params, const InitialState& state,
                                       std::span<const double> times, const PropagatorConfig& cfg, int jobs)
{
    if (jobs < 1)
        throw DomainError("jobs must be >= 1");
    if (times.empty())
        throw DomainError("survival series needs at least one time");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
            throw DomainError("survival series: times must be finite and >= 0");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw DomainError("survival series: times must be strictly increasing");
    }

    Propagator prop(params, state, cfg);
    const double t_min = times[0] > 0.0 ? times[0] : (times.size() > 1 ? times[1] : 0.0);
    if (t_min > 0.0 && params.lambda > 0.0)
        prop.prepare(t_min);

    std::vector<SurvivalPoint> rows(times.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= times.size())
                return;
            try {
                rows[i] = prop.survival(times[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(times.size());
                return;
            }
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(jobs), times.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t k = 0; k < n_threads; ++k)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    SurvivalSeries series;
    series.params = params;
    series.state = state;
    series.config = cfg;
    series.pole_count = static_cast<int>(prop.poles().size());
    for (const auto& r : rows)
        series.push_back(r);
    return series;
}

std::vector<double> log_times(double t_lo, double t_hi, std::size_t n)
{
    if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2)
        throw DomainError("log_times needs 0 < t_lo < t_hi and n >= 2");
    std::vector<double> t(n);
    const double ratio = std::log(t_hi / t_lo);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = t_lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
    t.front() = t_lo;
    t.back() = t_hi;
    return t;
}

double background_asymptote(double t, const ModelParams& params)
{
    params.validate();
    if (!(t > 0.0))
        throw DomainError("background_asymptote requires t > 0");
    if (params.lambda == 0.0)
        throw DomainError("background_asymptote requires lambda > 0");
    const double s = params.time_scale();
    const double l2 = params.lambda * params.lambda;
    return s * s * s / (l2 * l2 * t * t * t);
}

double breakdown_estimate(const ModelParams& params, const Pole& first_pole)
{
    params.validate();
    if (!(params.lambda > 1.0))
        throw DomainError("breakdown estimate 10 (hbar / Gamma_1) ln(lambda) only holds for lambda > 1");
    return 10.0 * lifetime_from_pole(first_pole, params) * std::log(params.lambda);
}

} // namespace deltashell
