#include "deltashell/quadrature.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace deltashell;

TEST_CASE("even Kronrod nodes coincide with the Gauss nodes")
{
    // integrate() reuses f at Kronrod node 2i for Gauss weight i.
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = kronrod::abscissa();
    const auto& xg = gauss::abscissa();
    REQUIRE(xk.size() == 8);
    REQUIRE(xg.size() == 4);
    for (std::size_t i = 0; i < xk.size(); i += 2)
        CHECK(xk[i] == xg[i / 2]);
}

TEST_CASE("vector integrator on known integrals")
{
    const double bp[] = {0.0, 1.0, 3.0};
    auto f = [](double s, std::span<cplx> out) {
        out[0] = std::exp(I * 5.0 * s);
        out[1] = s * s;
        out[2] = 1.0 / (1.0 + s * s);
    };
    const auto r = quad::integrate(f, bp, 3, 1e-13);
    CHECK(r.converged);
    CHECK(std::abs(r.value[0] - (std::exp(I * 15.0) - 1.0) / (5.0 * I)) <= 1e-13);
    CHECK(std::abs(r.value[1] - 9.0) <= 1e-13);
    CHECK(std::abs(r.value[2] - std::atan(3.0)) <= 1e-13);
}

TEST_CASE("halving the tolerance keeps the change below the reported error")
{
    const double bp[] = {0.0, 20.0};
    auto f = [](double s, std::span<cplx> out) { out[0] = std::exp(-0.3 * s) * std::exp(I * s * s); };
    double prev_err = 0.0;
    cplx prev{};
    for (double tol = 1e-4; tol >= 1e-10; tol /= 2.0) {
        const auto r = quad::integrate(f, bp, 1, tol);
        CHECK(r.converged);
        CHECK(r.error <= tol);
        if (prev_err > 0.0)
            CHECK(std::abs(r.value[0] - prev) <= prev_err + r.error);
        prev = r.value[0];
        prev_err = r.error;
    }
}

TEST_CASE("relative tolerance tightens the target")
{
    const double bp[] = {0.0, 1.0};
    auto f = [](double s, std::span<cplx> out) { out[0] = 1e-6 * std::cos(40.0 * s); };
    const auto r = quad::integrate(f, bp, 1, 1e-3, 400000, 1e-10);
    CHECK(r.tolerance <= 1e-15);
    CHECK(std::abs(r.value[0] - 1e-6 * std::sin(40.0) / 40.0) <= 1e-16);
}

TEST_CASE("trapezoid and Simpson weights")
{
    const auto t = quad::trapezoid_weights(101, 1.0);
    const auto s = quad::simpson_weights(101, 1.0);
    double st = 0.0, ss = 0.0, s3 = 0.0;
    for (std::size_t i = 0; i < 101; ++i) {
        const double x = i / 100.0;
        st += t[i];
        ss += s[i];
        s3 += s[i] * x * x * x;
    }
    CHECK(st == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ss == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s3 == doctest::Approx(0.25).epsilon(1e-14));
}
