#include "deltashell/errors.hpp"
#include "deltashell/poles.hpp"

#include <doctest.h>

using namespace deltashell;

namespace {

// -oint f dk over a circle around the pole, f = phi W sin(kx) / (2 pi).
// Periodic trapezoid converges geometrically for analytic integrands.
cplx residue_by_contour(const Pole& pole, double x, const InitialState& s, const ModelParams& p, double radius)
{
    const int m = 256;
    cplx sum{};
    for (int j = 0; j < m; ++j) {
        const cplx e = std::exp(I * (2.0 * pi * j / m));
        const cplx k = pole.momentum + radius * e;
        const cplx f = initial_overlap(k, s, p) * spectral_weight(k, p) * std::sin(k * x) / (2.0 * pi);
        sum += f * I * radius * e;
    }
    return -sum * (2.0 * pi / m);
}

} // namespace

TEST_CASE("poles are zeros of D, sorted and certified")
{
    for (double lambda : {0.3, 1.0, 3.6, 8.0}) {
        ModelParams p;
        p.lambda = lambda;
        const auto poles = find_poles(p, 25);
        REQUIRE(poles.size() == 25);
        for (std::size_t i = 0; i < poles.size(); ++i) {
            const auto& q = poles[i];
            CHECK(q.index == static_cast<int>(i) + 1);
            CHECK(q.certified);
            CHECK(q.momentum.imag() < 0.0);
            CHECK(q.momentum.real() > 0.0);
            CHECK(std::abs(denominator(q.momentum, p)) <= 1e-11 * std::max(1.0, std::abs(q.momentum)));
            if (i > 0)
                CHECK(q.momentum.real() > poles[i - 1].momentum.real());
        }
    }
}

TEST_CASE("argument principle counts every pole below the cut")
{
    for (double lambda : {0.65, 3.6}) {
        ModelParams p;
        p.lambda = lambda;
        const auto poles = find_poles(p, 12);
        const double re_hi = 0.5 * (poles[10].momentum.real() + poles[11].momentum.real());
        double depth = 0.0;
        for (int i = 0; i < 11; ++i)
            depth = std::max(depth, -poles[static_cast<std::size_t>(i)].momentum.imag());
        CHECK(count_zeros(lambda, 0.05, re_hi, -(depth + 1.0), 0.0) == 11);
        // A rectangle straddling no pole.
        CHECK(count_zeros(lambda, 0.05, 1.0, -0.5, -0.01) == 0);
    }
}

TEST_CASE("rectangle through a zero is refused")
{
    ModelParams p;
    p.lambda = 3.6;
    const auto k = find_poles(p, 1).front().momentum;
    CHECK_THROWS_AS(count_zeros(3.6, k.real() - 0.5, k.real() + 0.5, k.imag(), 0.0), ConvergenceError);
}

TEST_CASE("seed strategies agree")
{
    ModelParams p;
    p.lambda = 8.0;
    PoleSearchOptions o;
    o.seeds = SeedStrategy::deflated;
    const auto a = find_poles(p, 15, o);
    const auto b = find_poles(p, 15);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i].momentum - b[i].momentum) <= 1e-12 * std::abs(b[i].momentum));
}

TEST_CASE("extend_poles appends the same poles")
{
    ModelParams p;
    p.lambda = 1.0;
    auto part = find_poles(p, 5);
    extend_poles(p, part, 40);
    const auto full = find_poles(p, 40);
    REQUIRE(part.size() == 40);
    for (std::size_t i = 0; i < 40; ++i)
        CHECK(part[i].momentum == full[i].momentum);
}

TEST_CASE("asymptotic poles approach the Newton-polished ones")
{
    ModelParams p;
    p.lambda = 3.6;
    const auto poles = find_poles(p, 200);
    for (int n : {50, 100, 200})
        CHECK(std::abs(asymptotic_pole(n, 3.6) - poles[static_cast<std::size_t>(n - 1)].momentum) <= 1e-10);
}

TEST_CASE("residue closed form matches a contour integral around the pole")
{
    ModelParams p;
    p.lambda = 3.6;
    const auto poles = find_poles(p, 6);
    for (int n : {1, 3}) {
        const InitialState s{n};
        for (const auto& q : poles) {
            const double radius = 0.2 * std::min(1.0, -q.momentum.imag());
            for (double x : {0.25, 0.6}) {
                const cplx ref = residue_by_contour(q, x, s, p, radius);
                const cplx c = residue_amplitude(q, x, s, p);
                CHECK(std::abs(c - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("pole weights: the matching pole dominates")
{
    ModelParams p;
    p.lambda = 8.0;
    const auto poles = find_poles(p, 6);
    for (int n = 1; n <= 4; ++n) {
        double best = 0.0;
        int arg = 0;
        for (const auto& q : poles) {
            const double w = pole_weight(q, InitialState{n}, p).weight;
            CHECK(w > 0.0);
            if (w > best) {
                best = w;
                arg = q.index;
            }
        }
        CHECK(arg == n);
    }
}

TEST_CASE("Q-value, width and lifetime relations")
{
    ModelParams p;
    p.lambda = 3.6;
    p.mass = 1.7;
    p.hbar = 0.8;
    p.well_width = 2.0;
    const auto q = find_poles(p, 2).front();
    CHECK(q.width == doctest::Approx(-2.0 * q.energy.imag()).epsilon(1e-14));
    CHECK(q.lifetime == doctest::Approx(p.hbar / q.width).epsilon(1e-14));
    CHECK(q_value(q) == doctest::Approx(q.energy.real() / q.width).epsilon(1e-14));
    CHECK_FALSE(q.poorly_formed);
    ModelParams r;
    r.lambda = 0.3;
    CHECK(find_poles(r, 1).front().poorly_formed);
}
