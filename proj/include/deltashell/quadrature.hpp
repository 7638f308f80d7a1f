#pragma once

#include "deltashell/model.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace deltashell::quad {

/// Result of integrating a vector of complex-valued functions at once.
struct VectorResult {
    std::vector<cplx> value;
    double error = 0.0;  // sum over panels of max_j |K15 - G7|
    std::size_t panels = 0;
    double tolerance = 0.0; // target actually used
    bool converged = false;
};

namespace detail {

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double error = 0.0;
    std::size_t slot = 0;  // offset of the panel's value in the value pool
};

struct PanelOrder {
    bool operator()(const Panel& l, const Panel& r) const { return l.error < r.error; }
};

} // namespace detail

/// Globally adaptive 7/15-point Gauss-Kronrod for f: R -> C^dim.
///
/// `f(s, out)` must fill `out` (length dim). Initial panels are delimited
/// by `breakpoints` (strictly increasing, at least two entries); the worst
/// panel is bisected until the summed error estimate falls below `tol`.
/// With rel_tol > 0 the target becomes min(tol, rel_tol * max_j |I_j|),
/// the magnitude being taken from the initial panels.
template <class F>
VectorResult integrate(F&& f, std::span<const double> breakpoints, std::size_t dim, double tol,
                       std::size_t max_panels = 400000, double rel_tol = 0.0)
{
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();

    std::vector<cplx> pool;
    std::vector<std::size_t> free_slots;
    std::vector<cplx> fa(dim), fb(dim), gsum(dim);

    auto evaluate = [&](double a, double b) {
        detail::Panel p{a, b, 0.0, 0};
        if (!free_slots.empty()) {
            p.slot = free_slots.back();
            free_slots.pop_back();
        } else {
            p.slot = pool.size();
            pool.resize(pool.size() + dim);
        }
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        cplx* ksum = pool.data() + p.slot;
        std::fill(ksum, ksum + dim, cplx{});
        std::fill(gsum.begin(), gsum.end(), cplx{});
        f(c, std::span<cplx>(fa));
        for (std::size_t j = 0; j < dim; ++j) {
            ksum[j] += wk[0] * fa[j];
            gsum[j] += wg[0] * fa[j];
        }
        for (std::size_t i = 1; i < xk.size(); ++i) {
            f(c - h * xk[i], std::span<cplx>(fa));
            f(c + h * xk[i], std::span<cplx>(fb));
            const bool is_gauss = (i % 2 == 0);
            for (std::size_t j = 0; j < dim; ++j) {
                const cplx s = fa[j] + fb[j];
                ksum[j] += wk[i] * s;
                if (is_gauss)
                    gsum[j] += wg[i / 2] * s;
            }
        }
        double err = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            ksum[j] *= h;
            err = std::max(err, std::abs(ksum[j] - h * gsum[j]));
        }
        p.error = err;
        return p;
    };

    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelOrder> heap;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        auto p = evaluate(breakpoints[i], breakpoints[i + 1]);
        total += p.error;
        heap.push(p);
    }
    if (rel_tol > 0.0) {
        std::vector<cplx> first(dim);
        auto copy = heap;
        while (!copy.empty()) {
            const cplx* v = pool.data() + copy.top().slot;
            for (std::size_t j = 0; j < dim; ++j)
                first[j] += v[j];
            copy.pop();
        }
        double mag = 0.0;
        for (const auto& v : first)
            mag = std::max(mag, std::abs(v));
        tol = std::min(tol, std::max(rel_tol * mag, 1e-300));
    }

    while (total > tol && heap.size() < max_panels) {
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        free_slots.push_back(worst.slot);
        auto left = evaluate(worst.a, mid);
        auto right = evaluate(mid, worst.b);
        total += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    VectorResult result;
    result.value.assign(dim, cplx{});
    result.panels = heap.size();
    double err = 0.0;
    while (!heap.empty()) {
        const auto& p = heap.top();
        const cplx* v = pool.data() + p.slot;
        for (std::size_t j = 0; j < dim; ++j)
            result.value[j] += v[j];
        err += p.error;
        heap.pop();
    }
    result.error = err;
    result.tolerance = tol;
    result.converged = err <= tol;
    return result;
}

/// Trapezoid weights for n equally spaced nodes on [0, length].
inline std::vector<double> trapezoid_weights(std::size_t n, double length)
{
    std::vector<double> w(n, length / static_cast<double>(n - 1));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

/// Composite Simpson weights; n must be odd.
inline std::vector<double> simpson_weights(std::size_t n, double length)
{
    const double h = length / static_cast<double>(n - 1);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = (i == 0 || i + 1 == n) ? h / 3.0 : (i % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    return w;
}

} // namespace deltashell::quad
