#include "deltashell/analysis.hpp"
#include "deltashell/errors.hpp"

#include <doctest.h>

using namespace deltashell;

TEST_CASE("linear fit is exact on a line")
{
    const std::vector<double> x{0.0, 1.0, 2.0, 3.5, 7.0};
    std::vector<double> y;
    for (double v : x)
        y.push_back(2.5 - 0.75 * v);
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(f.slope_sigma <= 1e-14);
}

TEST_CASE("exponential fit recovers tau on exact data outside the Zeno region")
{
    std::vector<double> t, p;
    for (int i = 0; i < 400; ++i) {
        t.push_back(0.01 * i + 1e-3);
        p.push_back(0.97 * std::exp(-t.back() / 1.3));
    }
    const auto f = fit_exponential(t, p);
    CHECK(f.parameter == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(f.amplitude == doctest::Approx(0.97).epsilon(1e-12));
    CHECK(f.t_lo >= 0.2 * 1.3);
    CHECK(f.points >= 10);
}

TEST_CASE("power-law fit recovers the exponent on exact data")
{
    std::vector<double> t, p;
    for (int i = 0; i <= 300; ++i) {
        t.push_back(std::pow(10.0, i / 100.0));
        p.push_back(4.0 * std::pow(t.back(), -3.0));
    }
    const auto f = fit_powerlaw(t, p);
    CHECK(f.parameter == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.amplitude == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(std::log10(f.t_hi / f.t_lo) >= 0.5);
}

TEST_CASE("power-law window excludes an exponential head")
{
    std::vector<double> t, p;
    for (int i = 0; i <= 500; ++i) {
        t.push_back(std::pow(10.0, -1.0 + i / 100.0));
        p.push_back(std::exp(-t.back()) + 1e-3 * std::pow(t.back(), -3.0));
    }
    const auto f = fit_powerlaw(t, p);
    CHECK(f.parameter == doctest::Approx(3.0).epsilon(0.01));
    CHECK(f.t_lo > 10.0);
}

TEST_CASE("fits refuse short or invalid windows")
{
    std::vector<double> t{1, 2, 3}, p{0.9, 0.5, 0.3};
    CHECK_THROWS(fit_exponential(t, p));
    std::vector<double> q{1, 1, 1};
    CHECK_THROWS(fit_powerlaw(t, q));
}

TEST_CASE("oscillation detector counts sign changes of dP and ignores noise")
{
    std::vector<double> t, p, e;
    for (int i = 0; i < 1000; ++i) {
        t.push_back(1.0 + 0.01 * i);
        p.push_back(1e-3 * std::pow(t.back(), -3.0) * (1.0 + 0.5 * std::sin(3.0 * t.back())));
        e.push_back(0.0);
    }
    const auto r = detect_oscillations(t, p, e, 1.0, 10.99);
    CHECK(r.resolved);
    CHECK(r.count == static_cast<int>(r.extrema_times.size()));
    CHECK(r.count >= 6);
    // Same data with huge error bars: nothing is significant.
    std::vector<double> big(e.size(), 1.0);
    CHECK(detect_oscillations(t, p, big, 1.0, 10.99).count == 0);
}

TEST_CASE("breakdown time is the exponential / power-law crossing")
{
    FitResult e;
    e.kind = FitKind::exponential;
    e.parameter = 1.0;
    e.amplitude = 1.0;
    e.t_lo = 0.2;
    e.t_hi = 1.5;
    FitResult w;
    w.kind = FitKind::power_law;
    w.parameter = 3.0;
    w.amplitude = 1e-3;
    w.t_lo = 30.0;
    w.t_hi = 100.0;
    std::vector<double> t, p;
    for (int i = 0; i <= 600; ++i) {
        t.push_back(std::pow(10.0, -1.0 + i / 200.0));
        p.push_back(std::exp(-t.back()) + 1e-3 * std::pow(t.back(), -3.0));
    }
    const auto b = measure_breakdown(t, p, e, w);
    REQUIRE(b.intersection_found);
    CHECK(std::exp(-b.intersection) == doctest::Approx(1e-3 * std::pow(b.intersection, -3.0)).epsilon(1e-9));
    REQUIRE(b.deviation_found);
    CHECK(b.deviation_time < b.intersection);
}
