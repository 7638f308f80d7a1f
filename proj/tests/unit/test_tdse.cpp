#include "deltashell/errors.hpp"
#include "deltashell/tdse.hpp"

#include <doctest.h>

using namespace deltashell;

namespace {

double discrete_norm(const std::vector<cplx>& u, double dx)
{
    double s = 0.0;
    for (const auto& v : u)
        s += std::norm(v);
    return s * dx;
}

} // namespace

TEST_CASE("barrier integrates to lambda / 2")
{
    ModelParams p;
    p.lambda = 3.6;
    for (double d : {0.04, 0.01}) {
        double s = 0.0;
        const double h = d / 50.0;
        for (double x = 1.0 - 12.0 * d; x <= 1.0 + 12.0 * d; x += h)
            s += gaussian_barrier(x, d, p) * h;
        CHECK(s == doctest::Approx(1.8).epsilon(1e-9));
    }
}

TEST_CASE("Crank-Nicolson is unitary without the absorber")
{
    ModelParams p;
    p.lambda = 8.0;
    TdseConfig cfg;
    cfg.delta = 0.04;
    cfg.domain_length = 10.0;
    cfg.absorber.enabled = false;
    const double dt = cfg.step_t();
    const auto r = evolve(InitialState{1}, 1e4 * dt, cfg, p);
    CHECK(r.steps == 10000);
    const double n0 = r.norm_ledger.front().total;
    for (const auto& s : r.norm_ledger)
        CHECK(std::abs(s.total - n0) <= 1e-10 * n0);
}

TEST_CASE("discrete box eigenvector only picks up the Cayley phase")
{
    ModelParams p;  // lambda = 0: free particle in [0, L]
    TdseConfig cfg;
    cfg.delta = 0.08;
    cfg.domain_length = 10.0;
    cfg.absorber.enabled = false;
    const double h = cfg.step_x();
    const auto n = static_cast<std::size_t>(std::llround(cfg.domain_length / h));
    const int m = 7;
    std::vector<cplx> u0(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        u0[j] = std::sin(m * pi * static_cast<double>(j) / static_cast<double>(n));
    const double dt = cfg.step_t();
    const std::size_t steps = 2000;
    const auto r = evolve(u0, static_cast<double>(steps) * dt, cfg, p);
    const double e = (1.0 - std::cos(m * pi / static_cast<double>(n))) / (h * h);
    const cplx g = (1.0 - I * e * r.dt / 2.0) / (1.0 + I * e * r.dt / 2.0);
    const cplx phase = std::pow(g, static_cast<double>(r.steps));
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j)
        err = std::max(err, std::abs(r.values[j] - phase * u0[j]));
    CHECK(err <= 1e-9);
}

TEST_CASE("absorber reflection is small across the resonance band")
{
    TdseConfig cfg;
    for (double k = 2.6; k <= 5.0; k += 0.1)
        CHECK(absorber_reflection(k, cfg) <= 1e-6);
}

TEST_CASE("evolve refuses a reflecting boundary layer")
{
    ModelParams p;
    p.lambda = 8.0;
    TdseConfig cfg;
    cfg.domain_length = 10.0;
    cfg.absorber.strength = 2000.0;
    cfg.absorber.power = 1;
    CHECK_THROWS_AS(evolve(InitialState{1}, 0.01, cfg, p), ConvergenceError);
}

TEST_CASE("config validation")
{
    TdseConfig cfg;
    cfg.dx = cfg.delta / 4.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.dx = 0.0;
    cfg.dt = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.dt = 0.0;
    cfg.absorber.start_fraction = 0.5;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("Delta extrapolation is exact for quadratic dependence")
{
    const std::vector<double> d{0.04, 0.02, 0.01, 0.005};
    std::vector<double> v;
    for (double x : d)
        v.push_back(1.25 + 3.0 * x - 20.0 * x * x);
    const auto e = extrapolate_delta(d, v);
    CHECK(e.value == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(e.monotone);
    CHECK(e.error > 0.0);
    CHECK_THROWS_AS(extrapolate_delta(std::vector<double>{0.1, 0.2}, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST_CASE("interpolation is exact on nodes")
{
    ModelParams p;
    p.lambda = 8.0;
    TdseConfig cfg;
    cfg.delta = 0.08;
    const auto r = evolve(InitialState{1}, 0.02, cfg, p);
    for (std::size_t j : {std::size_t{3}, std::size_t{40}, std::size_t{77}})
        CHECK(r.at(r.grid[j]) == r.values[j]);
    CHECK(discrete_norm(r.values, r.dx) <= 1.0 + 1e-9);
}
