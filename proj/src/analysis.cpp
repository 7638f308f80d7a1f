#include "deltashell/analysis.hpp"

#include "deltashell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deltashell {

namespace {

void check_series(std::span<const double> t, std::span<const double> p)
{
    if (t.size() != p.size())
        throw DataError("time and probability arrays differ in length");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw DataError("times must be strictly increasing (row " + std::to_string(i + 1) + ")");
}

struct Selection {
    std::vector<double> x, y;
};

FitResult exponential_from(const Selection& s, double t_lo, double t_hi, int iterations)
{
    const auto lf = linear_fit(s.x, s.y);
    if (!(lf.slope < 0.0))
        throw ConvergenceError("exponential fit: ln P does not decrease over the window");
    FitResult r;
    r.kind = FitKind::exponential;
    r.parameter = -1.0 / lf.slope;
    r.amplitude = std::exp(lf.intercept);
    r.uncertainty = std::max(lf.slope_sigma / (lf.slope * lf.slope),
                             std::numeric_limits<double>::epsilon() * r.parameter);
    r.t_lo = t_lo;
    r.t_hi = t_hi;
    r.residual_rms = lf.residual_rms;
    r.points = s.x.size();
    r.iterations = iterations;
    return r;
}

Selection select(std::span<const double> t, std::span<const double> p, std::size_t begin, std::size_t end)
{
    Selection s;
    for (std::size_t i = begin; i < end; ++i) {
        if (!(p[i] > 0.0))
            throw DataError("non-positive probability inside the fit window (row " + std::to_string(i + 1) + ")");
        s.x.push_back(t[i]);
        s.y.push_back(std::log(p[i]));
    }
    return s;
}

FitResult band_fit(std::span<const double> t, std::span<const double> p, const ExponentialWindow& w)
{
    if (!(w.band_lo > 0.0 && w.band_hi > w.band_lo))
        throw DomainError("exponential window: need 0 < band_lo < band_hi");
    double t_start = 0.0;
    FitResult fit;
    for (int it = 1; it <= 20; ++it) {
        std::size_t first = 0;
        while (first < t.size() && (t[first] < t_start || p[first] > w.band_hi))
            ++first;
        std::size_t last = first;
        while (last < t.size() && p[last] >= w.band_lo)
            ++last;
        if (last - first < w.min_points)
            throw DataError("exponential fit: only " + std::to_string(last - first) + " points in the window (need " +
                            std::to_string(w.min_points) + ")");
        fit = exponential_from(select(t, p, first, last), t[first], t[last - 1], it);
        // The quadratic onset is always excluded.
        const double next_start = w.zeno_fraction * fit.parameter;
        if (next_start <= t[first])
            return fit;
        t_start = next_start;
    }
    throw ConvergenceError("exponential fit: window start did not settle");
}

FitResult deviation_fit(std::span<const double> t, std::span<const double> p, const ExponentialWindow& w)
{
    FitResult fit = band_fit(t, p, w);
    for (int it = 1; it <= w.max_iterations; ++it) {
        const double tau = fit.parameter;
        std::size_t start = 0;
        while (start < t.size() && t[start] < w.zeno_fraction * tau)
            ++start;
        std::size_t end = start + w.min_points;
        while (end < t.size()) {
            const double model = fit.amplitude * std::exp(-t[end] / tau);
            if (std::abs(p[end] / model - 1.0) > w.deviation)
                break;
            ++end;
        }
        if (end > t.size() || end - start < w.min_points)
            throw DataError("exponential fit: fewer than " + std::to_string(w.min_points) + " points in the window");
        fit = exponential_from(select(t, p, start, end), t[start], t[end - 1], it);
        if (std::abs(fit.parameter - tau) <= 1e-6 * tau)
            return fit;
    }
    throw ConvergenceError("exponential fit: window iteration did not reach a fixed point in " +
                           std::to_string(w.max_iterations) + " steps");
}

} // namespace

LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size() || n < 3)
        throw DataError("linear fit needs at least 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw DataError("linear fit: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ssr += r * r;
    }
    f.slope_sigma = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    f.residual_rms = std::sqrt(ssr / static_cast<double>(n));
    return f;
}

std::vector<double> local_loglog_slopes(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size() || n < 2)
        throw DataError("local slopes need at least 2 points");
    std::vector<double> lx(n), ly(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw DataError("local slopes need positive data (row " + std::to_string(i + 1) + ")");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    s[0] = (ly[1] - ly[0]) / (lx[1] - lx[0]);
    s[n - 1] = (ly[n - 1] - ly[n - 2]) / (lx[n - 1] - lx[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        s[i] = (ly[i + 1] - ly[i - 1]) / (lx[i + 1] - lx[i - 1]);
    return s;
}

FitResult fit_exponential(std::span<const double> t, std::span<const double> p, const ExponentialWindow& window)
{
    check_series(t, p);
    if (window.policy == ExponentialWindow::Policy::deviation)
        return deviation_fit(t, p, window);
    return band_fit(t, p, window);
}

FitResult fit_exponential(const SurvivalSeries& series, const ExponentialWindow& window)
{
    return fit_exponential(series.times, series.p_total, window);
}

FitResult fit_powerlaw(std::span<const double> t, std::span<const double> p, const PowerLawWindow& window)
{
    check_series(t, p);
    std::size_t lo = 0, hi = t.size();
    while (lo < hi && (t[lo] < window.t_min || !(t[lo] > 0.0)))
        ++lo;
    while (hi > lo && t[hi - 1] > window.t_max)
        --hi;
    if (hi - lo < std::max<std::size_t>(window.min_points, 3))
        throw DataError("power-law fit: too few points in the allowed range");
    for (std::size_t i = lo; i < hi; ++i)
        if (!(p[i] > 0.0))
            throw DataError("power-law fit: non-positive probability (row " + std::to_string(i + 1) + ")");

    const auto ts = t.subspan(lo, hi - lo);
    const auto ps = p.subspan(lo, hi - lo);
    const auto slopes = local_loglog_slopes(ts, ps);
    const std::size_t n = ts.size();
    const double t_end = ts[n - 1];

    // Reference: median slope over the final half-decade.
    std::vector<double> tail;
    for (std::size_t i = n; i-- > 0 && std::log10(t_end / ts[i]) <= 0.5;)
        tail.push_back(slopes[i]);
    std::nth_element(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2), tail.end());
    const double ref = tail[tail.size() / 2];

    std::size_t start = n - 1;
    while (start > 0 && std::abs(slopes[start - 1] - ref) <= window.slope_tolerance)
        --start;
    const double decades = std::log10(t_end / ts[start]);
    if (decades < window.min_decades || n - start < window.min_points)
        throw ConvergenceError("power-law fit: no stable-slope window of " + std::to_string(window.min_decades) +
                               " decades (found " + std::to_string(decades) + ")");

    Selection s;
    for (std::size_t i = start; i < n; ++i) {
        s.x.push_back(std::log(ts[i]));
        s.y.push_back(std::log(ps[i]));
    }
    const auto lf = linear_fit(s.x, s.y);
    FitResult r;
    r.kind = FitKind::power_law;
    r.parameter = -lf.slope;
    r.amplitude = std::exp(lf.intercept);
    r.uncertainty = std::max(lf.slope_sigma, std::numeric_limits<double>::epsilon() * std::abs(r.parameter));
    r.t_lo = ts[start];
    r.t_hi = t_end;
    r.residual_rms = lf.residual_rms;
    r.points = n - start;
    r.iterations = 1;
    return r;
}

FitResult fit_powerlaw(const SurvivalSeries& series, const PowerLawWindow& window)
{
    return fit_powerlaw(series.times, series.p_total, window);
}

Breakdown measure_breakdown(std::span<const double> t, std::span<const double> p, const FitResult& exp_fit,
                            const FitResult& pow_fit, double deviation)
{
    check_series(t, p);
    if (exp_fit.kind != FitKind::exponential || pow_fit.kind != FitKind::power_law)
        throw DomainError("measure_breakdown expects an exponential and a power-law fit");
    Breakdown b;

    // ln(c e^{-t/tau}) - ln(B t^-n): positive in the exponential regime.
    auto h = [&](double x) {
        return std::log(exp_fit.amplitude) - x / exp_fit.parameter - std::log(pow_fit.amplitude) +
               pow_fit.parameter * std::log(x);
    };
    double a = exp_fit.t_lo, c = pow_fit.t_hi;
    if (a > 0.0 && c > a && h(a) > 0.0 && h(c) < 0.0) {
        for (int i = 0; i < 200 && c - a > 1e-13 * c; ++i) {
            const double m = 0.5 * (a + c);
            (h(m) > 0.0 ? a : c) = m;
        }
        b.intersection = 0.5 * (a + c);
        b.intersection_found = true;
    }

    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= exp_fit.t_hi)
            continue;
        const double model = exp_fit.amplitude * std::exp(-t[i] / exp_fit.parameter);
        if (p[i] > (1.0 + deviation) * model) {
            b.deviation_time = t[i];
            b.p_at_deviation = p[i];
            b.deviation_found = true;
            break;
        }
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= pow_fit.t_lo) {
            b.p_at_powerlaw_entry = p[i];
            break;
        }
    }
    return b;
}

Breakdown measure_breakdown(const SurvivalSeries& series, const FitResult& exp_fit, const FitResult& pow_fit,
                            double deviation)
{
    return measure_breakdown(series.times, series.p_total, exp_fit, pow_fit, deviation);
}

OscillationReport detect_oscillations(std::span<const double> t, std::span<const double> p,
                                      std::span<const double> err, double t_lo, double t_hi)
{
    check_series(t, p);
    if (err.size() != t.size())
        throw DataError("error column length differs from the series");
    OscillationReport r;
    r.t_lo = t_lo;
    r.t_hi = t_hi;
    if (!(t_hi > t_lo))
        return r;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_lo && t[i] <= t_hi)
            idx.push_back(i);
    r.points = idx.size();
    r.resolved = idx.size() >= 50;
    int last_sign = 0;
    double last_time = 0.0;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const std::size_t i = idx[k], j = idx[k + 1];
        const double dp = p[j] - p[i];
        const double floor = 3.0 * std::max(std::abs(err[i]), std::abs(err[j]));
        if (std::abs(dp) <= floor)
            continue;
        const int sign = dp > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) {
            ++r.count;
            r.extrema_times.push_back(0.5 * (last_time + t[i]));
        }
        last_sign = sign;
        last_time = t[j];
    }
    return r;
}

OscillationReport detect_oscillations(const SurvivalSeries& series, const FitResult& exp_fit,
                                      const FitResult& pow_fit)
{
    return detect_oscillations(series.times, series.p_total, series.err_est, exp_fit.t_hi, pow_fit.t_lo);
}

OscillationReport detect_oscillations(const SurvivalSeries& series)
{
    const auto e = fit_exponential(series);
    double end = series.times.back();
    try {
        end = fit_powerlaw(series).t_lo;
    } catch (const Error&) {
    }
    return detect_oscillations(series.times, series.p_total, series.err_est, e.t_hi, end);
}

RegimeReport regime_report(const SurvivalSeries& series, const Pole& first_pole, const ExponentialWindow& exp_window,
                           const PowerLawWindow& pow_window)
{
    const auto& params = series.params;
    RegimeReport r;
    r.lambda = params.lambda;
    r.tau0 = characteristic_time(params);
    r.exponential = fit_exponential(series, exp_window);
    r.tau_fit = r.exponential.parameter;
    r.tau_pole = lifetime_from_pole(first_pole, params);
    r.discrepancy_pct = 100.0 * std::abs(r.tau_fit - r.tau_pole) / (0.5 * (r.tau_fit + r.tau_pole));
    r.discrepancy_vs_fit_pct = 100.0 * std::abs(r.tau_fit - r.tau_pole) / r.tau_fit;
    r.q_value = q_value(first_pole);
    if (params.lambda > 1.0)
        r.breakdown_estimate = breakdown_estimate(params, first_pole);
    try {
        r.power_law = fit_powerlaw(series, pow_window);
        r.power_law_found = true;
    } catch (const Error&) {
        r.power_law_found = false;
    }
    if (r.power_law_found) {
        r.breakdown = measure_breakdown(series, r.exponential, r.power_law);
        r.oscillations = detect_oscillations(series, r.exponential, r.power_law);
    } else {
        r.oscillations = detect_oscillations(series.times, series.p_total, series.err_est, r.exponential.t_hi,
                                             series.times.back());
    }
    return r;
}

} // namespace deltashell
