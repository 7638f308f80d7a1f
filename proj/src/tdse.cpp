#include "deltashell/tdse.hpp"

#include "deltashell/errors.hpp"
#include "deltashell/poles.hpp"
#include "deltashell/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace deltashell {

void TdseConfig::validate() const
{
    if (!(delta > 0.0))
        throw DomainError("tdse: barrier width delta must be > 0");
    if (!(domain_length >= 10.0))
        throw DomainError("tdse: domain length must be >= 10 a");
    const double h = step_x();
    if (!(h > 0.0) || h > delta / 8.0 * (1.0 + 1e-12))
        throw DomainError("tdse: dx must satisfy 0 < dx <= delta / 8");
    if (dt < 0.0 || (dt > 0.0 && dt > h * h * (1.0 + 1e-12)))
        throw DomainError("tdse: dt must satisfy 0 < dt <= dx^2");
    if (absorber.enabled) {
        if (absorber.start_fraction < 0.7 || absorber.start_fraction >= 1.0)
            throw DomainError("tdse: absorber must start at >= 0.7 L");
        if (!(absorber.strength > 0.0) || absorber.power < 1)
            throw DomainError("tdse: absorber strength and power must be positive");
    }
    if (ledger_samples < 2)
        throw DomainError("tdse: need at least 2 ledger samples");
}

double TdseConfig::step_t() const
{
    const double h = step_x();
    return dt > 0.0 ? dt : h * h;
}

double gaussian_barrier(double x, double delta, const ModelParams& params)
{
    if (!(delta > 0.0))
        throw DomainError("gaussian_barrier: delta must be > 0");
    const double z = (x - 1.0) / delta;
    return 0.5 * params.lambda / (std::sqrt(2.0 * pi) * delta) * std::exp(-0.5 * z * z);
}

namespace {

double absorber_profile(double x, const TdseConfig& cfg)
{
    if (!cfg.absorber.enabled)
        return 0.0;
    const double x0 = cfg.absorber.start_fraction * cfg.domain_length;
    if (x <= x0)
        return 0.0;
    return cfg.absorber.strength * std::pow((x - x0) / (cfg.domain_length - x0), cfg.absorber.power);
}

std::size_t node_count(const TdseConfig& cfg)
{
    return static_cast<std::size_t>(std::llround(cfg.domain_length / cfg.step_x()));
}

} // namespace

double absorber_reflection(double k, const TdseConfig& cfg)
{
    const std::size_t n = node_count(cfg);
    const double h = cfg.domain_length / static_cast<double>(n);
    const double energy = (1.0 - std::cos(k * h)) / (h * h);
    // March the discrete stationary equation from the wall into the free region.
    const auto j_free = static_cast<std::size_t>(0.5 * cfg.absorber.start_fraction * cfg.domain_length / h);
    cplx next = 0.0;  // u_N
    cplx cur = 1.0;   // u_{N-1}
    double scale_guard = 0.0;
    for (std::size_t j = n - 1; j > j_free; --j) {
        const cplx pot = cplx{0.0, -absorber_profile(static_cast<double>(j) * h, cfg)};
        const cplx prev = 2.0 * cur - next + 2.0 * h * h * (pot - energy) * cur;
        next = cur;
        cur = prev;
        scale_guard = std::abs(cur);
        if (scale_guard > 1e200) {
            cur /= scale_guard;
            next /= scale_guard;
        }
    }
    // cur = u_{j_free}, next = u_{j_free + 1}; split into e^{+ikx} (incident)
    // and e^{-ikx} (reflected) using the two nodes.
    const cplx e = std::exp(I * k * h);
    const cplx b = (cur * e - next) / (e - 1.0 / e);
    const cplx a = cur - b;
    return std::norm(b / a);
}

cplx TdseResult::at(double x) const
{
    if (grid.size() < 3 || x < grid.front() || x > grid.back())
        throw DomainError("tdse: position outside the grid");
    const double u = x / dx;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9)
        return values[static_cast<std::size_t>(r)];
    auto i = static_cast<std::size_t>(std::floor(u));
    i = std::clamp<std::size_t>(i, 1, grid.size() - 2);
    const double s = u - static_cast<double>(i);
    // Quadratic through i - 1, i, i + 1.
    return values[i - 1] * (0.5 * s * (s - 1.0)) + values[i] * (1.0 - s * s) + values[i + 1] * (0.5 * s * (s + 1.0));
}

TdseResult evolve(std::span<const cplx> psi0, double t_final, const TdseConfig& cfg, const ModelParams& params,
                  std::span<const double> snapshot_times)
{
    params.validate();
    cfg.validate();
    if (!(t_final >= 0.0))
        throw DomainError("tdse: t_final must be >= 0");
    const std::size_t n = node_count(cfg);
    if (psi0.size() != n + 1)
        throw DomainError("tdse: initial vector must have N + 1 = " + std::to_string(n + 1) + " entries");
    const double h = cfg.domain_length / static_cast<double>(n);

    TdseResult res;
    res.dx = h;
    res.steps = t_final > 0.0 ? static_cast<std::size_t>(std::ceil(t_final / cfg.step_t() - 1e-9)) : 0;
    res.dt = res.steps > 0 ? t_final / static_cast<double>(res.steps) : cfg.step_t();
    const double dt = res.dt;

    if (cfg.absorber.enabled && params.lambda > 0.0) {
        const double k1 = find_poles(params, 1).front().momentum.real() * params.well_width;
        res.reflection = absorber_reflection(k1, cfg);
        if (res.reflection > cfg.reflection_limit)
            throw ConvergenceError("tdse: absorber reflection " + std::to_string(res.reflection) + " exceeds limit");
    }

    res.grid.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        res.grid[j] = static_cast<double>(j) * h;

    // (1 + i dt H / 2) u' = (1 - i dt H / 2) u on the interior nodes 1..n-1.
    const std::size_t m = n - 1;
    const cplx off = I * (0.5 * dt) * (-0.5 / (h * h));
    std::vector<cplx> diag_l(m), diag_r(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = res.grid[k + 1];
        const double v = params.lambda > 0.0 ? gaussian_barrier(x, cfg.delta, params) : 0.0;
        const cplx hd = cplx{1.0 / (h * h) + v, -absorber_profile(x, cfg)};
        diag_l[k] = 1.0 + I * (0.5 * dt) * hd;
        diag_r[k] = 1.0 - I * (0.5 * dt) * hd;
    }
    // Thomas factorization, done once.
    std::vector<cplx> inv_piv(m), mult(m);
    {
        cplx piv = diag_l[0];
        inv_piv[0] = 1.0 / piv;
        for (std::size_t k = 1; k < m; ++k) {
            mult[k] = off * inv_piv[k - 1];
            piv = diag_l[k] - mult[k] * off;
            inv_piv[k] = 1.0 / piv;
        }
    }

    std::vector<cplx> u(psi0.begin(), psi0.end());
    u.front() = 0.0;
    u.back() = 0.0;
    std::vector<cplx> rhs(m);

    const auto inner_end = static_cast<std::size_t>(std::floor(1.0 / h + 1e-9));
    auto record = [&](double time) {
        NormSample s;
        s.time = time;
        double tot = 0.0;
        for (std::size_t j = 1; j < n; ++j)
            tot += std::norm(u[j]);
        s.total = tot * h;
        double in = 0.5 * std::norm(u[inner_end]);
        for (std::size_t j = 1; j < inner_end; ++j)
            in += std::norm(u[j]);
        s.inner = in * h;
        if (!res.norm_ledger.empty())
            res.max_inner_rise = std::max(res.max_inner_rise, s.inner - res.norm_ledger.back().inner);
        res.norm_ledger.push_back(s);
    };

    std::vector<std::size_t> snap_steps;
    for (double ts : snapshot_times) {
        if (ts < 0.0 || ts > t_final * (1.0 + 1e-12))
            throw DomainError("tdse: snapshot time outside [0, t_final]");
        snap_steps.push_back(static_cast<std::size_t>(std::llround(ts / dt)));
    }
    auto take_snapshots = [&](std::size_t step) {
        for (std::size_t k = 0; k < snap_steps.size(); ++k)
            if (snap_steps[k] == step)
                res.snapshots.push_back(TdseSnapshot{static_cast<double>(step) * dt, u});
    };

    const std::size_t stride = std::max<std::size_t>(1, res.steps / cfg.ledger_samples);
    record(0.0);
    take_snapshots(0);
    for (std::size_t step = 1; step <= res.steps; ++step) {
        for (std::size_t k = 0; k < m; ++k)
            rhs[k] = diag_r[k] * u[k + 1] - off * (u[k] + u[k + 2]);
        for (std::size_t k = 1; k < m; ++k)
            rhs[k] -= mult[k] * rhs[k - 1];
        u[m] = rhs[m - 1] * inv_piv[m - 1];
        for (std::size_t k = m - 1; k-- > 0;)
            u[k + 1] = (rhs[k] - off * u[k + 2]) * inv_piv[k];
        if (step % stride == 0 || step == res.steps)
            record(static_cast<double>(step) * dt);
        take_snapshots(step);
    }
    res.time = static_cast<double>(res.steps) * dt;
    res.values = std::move(u);
    return res;
}

TdseResult evolve(const InitialState& state, double t_final, const TdseConfig& cfg, const ModelParams& params,
                  std::span<const double> snapshot_times)
{
    state.validate();
    cfg.validate();
    const std::size_t n = node_count(cfg);
    const double h = cfg.domain_length / static_cast<double>(n);
    std::vector<cplx> psi0(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = static_cast<double>(j) * h;
        psi0[j] = x <= 1.0 ? std::sqrt(2.0) * std::sin(state.mode * pi * x) : 0.0;
    }
    return evolve(psi0, t_final, cfg, params, snapshot_times);
}

Extrapolation extrapolate_delta(std::span<const double> deltas, std::span<const double> values)
{
    const std::size_t n = deltas.size();
    if (n != values.size())
        throw DomainError("extrapolate_delta: length mismatch");
    if (n < 3)
        throw DomainError("extrapolate_delta: need at least 3 widths");
    for (double d : deltas)
        if (!(d > 0.0))
            throw DomainError("extrapolate_delta: widths must be > 0");

    // Least squares in the monomial basis via normal equations (tiny systems).
    auto fit_at_zero = [&](int degree) {
        const int p = degree + 1;
        double a[3][4] = {};
        for (std::size_t i = 0; i < n; ++i) {
            double pw[3] = {1.0, deltas[i], deltas[i] * deltas[i]};
            for (int r = 0; r < p; ++r) {
                for (int c = 0; c < p; ++c)
                    a[r][c] += pw[r] * pw[c];
                a[r][p] += pw[r] * values[i];
            }
        }
        for (int c = 0; c < p; ++c) {
            int best = c;
            for (int r = c + 1; r < p; ++r)
                if (std::abs(a[r][c]) > std::abs(a[best][c]))
                    best = r;
            for (int k = 0; k <= p; ++k)
                std::swap(a[c][k], a[best][k]);
            for (int r = 0; r < p; ++r) {
                if (r == c)
                    continue;
                const double f = a[r][c] / a[c][c];
                for (int k = c; k <= p; ++k)
                    a[r][k] -= f * a[c][k];
            }
        }
        return a[0][p] / a[0][0];
    };

    Extrapolation e;
    e.value = fit_at_zero(2);
    e.linear_value = fit_at_zero(1);
    e.error = std::abs(e.value - e.linear_value);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return deltas[l] < deltas[r]; });
    int direction = 0;
    for (std::size_t k = 1; k < n; ++k) {
        const double d = values[order[k]] - values[order[k - 1]];
        const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (s != 0 && direction != 0 && s != direction)
            e.monotone = false;
        if (s != 0)
            direction = s;
    }
    return e;
}

TdseValidation validate_against_contour(const ModelParams& params, const InitialState& state, double x_over_a,
                                        double t, std::span<const double> deltas, const TdseConfig& base, int jobs)
{
    if (jobs < 1)
        throw DomainError("jobs must be >= 1");
    if (!(x_over_a > 0.0 && x_over_a < 1.0))
        throw DomainError("validation point must lie inside the well");
    if (deltas.size() < 3)
        throw DomainError("validation needs at least 3 barrier widths");
    TdseValidation v;
    v.lambda = params.lambda;
    v.x = x_over_a;
    v.t = t;
    v.deltas.assign(deltas.begin(), deltas.end());
    v.observables.assign(deltas.size(), 0.0);
    v.reflections.assign(deltas.size(), 0.0);

    const double tau = t / params.time_scale();
    const auto finest = static_cast<std::size_t>(std::min_element(deltas.begin(), deltas.end()) - deltas.begin());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](std::size_t i) {
        try {
            TdseConfig cfg = base;
            cfg.delta = deltas[i];
            cfg.dx = 0.0;
            cfg.dt = 0.0;
            const auto r = evolve(state, tau, cfg, params);
            // Physical density with a = well_width.
            v.observables[i] = std::norm(r.at(x_over_a)) / params.well_width;
            v.reflections[i] = r.reflection;
            if (i == finest) {
                v.final_grid = r.grid;
                v.final_values = r.values;
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
        }
    };
    if (jobs == 1) {
        for (std::size_t i = 0; i < deltas.size(); ++i)
            run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), deltas.size());
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < deltas.size(); i = next++)
                    run(i);
            });
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    v.extrapolated = extrapolate_delta(v.deltas, v.observables);
    Propagator prop(params, state);
    const double xs[] = {x_over_a * params.well_width};
    v.contour = std::norm(t > 0.0 ? (prop.background(xs, t)[0] + prop.pole_sum(xs, t)[0]) : prop.direct(xs, t)[0]);
    v.relative_difference = std::abs(v.extrapolated.value - v.contour) / v.contour;
    return v;
}

} // namespace deltashell
