#include "deltashell/errors.hpp"
#include "deltashell/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <array>

using namespace deltashell;

namespace {

// Interior A sin(kx), exterior e^{-ikx} + B e^{ikx}; continuity at a and
// psi'(a+) - psi'(a-) = (lambda / a) psi(a). Solved as a 2x2 system.
std::pair<cplx, cplx> matching_oracle(double k, const ModelParams& p)
{
    const double a = p.well_width;
    const double g = p.lambda / a;
    // A sin(ka) - B e^{ika} = e^{-ika}
    // -A (k cos(ka) + g sin(ka)) + B ik e^{ika} = ik e^{-ika}
    const cplx m11 = std::sin(k * a), m12 = -std::exp(I * k * a);
    const cplx m21 = -(k * std::cos(k * a) + g * std::sin(k * a)), m22 = I * k * std::exp(I * k * a);
    const cplx r1 = std::exp(-I * k * a), r2 = I * k * std::exp(-I * k * a);
    const cplx det = m11 * m22 - m12 * m21;
    return {(r1 * m22 - m12 * r2) / det, (m11 * r2 - m21 * r1) / det};
}

cplx overlap_by_quadrature(cplx k, const InitialState& s, const ModelParams& p)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto re = [&](double x) { return (s.value(x, p) * std::sin(k * x)).real(); };
    auto im = [&](double x) { return (s.value(x, p) * std::sin(k * x)).imag(); };
    return {GK::integrate(re, 0.0, p.well_width, 15, 1e-14), GK::integrate(im, 0.0, p.well_width, 15, 1e-14)};
}

} // namespace

TEST_CASE("reflection amplitude has unit modulus on the real axis")
{
    for (double lambda : {0.3, 1.0, 3.6, 8.0, 50.0}) {
        ModelParams p;
        p.lambda = lambda;
        for (double k = 0.05; k < 40.0; k += 0.173)
            CHECK(std::abs(coefficient_b(k, p)) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("interior amplitude matches the matching conditions and |A|^2 = W")
{
    ModelParams p;
    p.well_width = 1.7;
    for (double lambda : {0.65, 3.6, 8.0}) {
        p.lambda = lambda;
        for (double k = 0.11; k < 20.0; k += 0.37) {
            const auto [a_ref, b_ref] = matching_oracle(k, p);
            CHECK(std::abs(coefficient_a(k, p) - a_ref) <= 1e-12 * std::abs(a_ref) + 1e-14);
            CHECK(std::abs(coefficient_b(k, p) - b_ref) <= 1e-12);
            const cplx w = spectral_weight(k, p);
            CHECK(std::abs(w.imag()) <= 1e-12 * std::abs(w));
            CHECK(w.real() == doctest::Approx(std::norm(coefficient_a(k, p))).epsilon(1e-12));
        }
    }
}

TEST_CASE("D' agrees with central differences in the complex plane")
{
    ModelParams p;
    p.well_width = 0.8;
    const double h = 1e-6;
    for (double lambda : {0.3, 3.6, 8.0}) {
        p.lambda = lambda;
        for (cplx k : {cplx{1.3, -0.2}, cplx{7.5, -1.1}, cplx{0.4, 0.3}, cplx{15.0, -3.0}}) {
            const cplx fd = (denominator(k + h, p) - denominator(k - h, p)) / (2.0 * h);
            const cplx fdi = (denominator(k + I * h, p) - denominator(k - I * h, p)) / (2.0 * I * h);
            const cplx d = denominator_derivative(k, p);
            CHECK(std::abs(d - fd) <= 1e-7 * std::max(1.0, std::abs(d)));
            CHECK(std::abs(d - fdi) <= 1e-7 * std::max(1.0, std::abs(d)));
        }
    }
}

TEST_CASE("conjugate denominator is conj(D) on the real axis")
{
    ModelParams p;
    p.lambda = 3.6;
    for (double k = 0.1; k < 10.0; k += 0.7)
        CHECK(std::abs(conjugate_denominator(k, p) - std::conj(denominator(k, p))) <= 1e-13);
}

TEST_CASE("closed-form overlap matches direct quadrature")
{
    ModelParams p;
    p.well_width = 1.3;
    for (int n : {1, 2, 4}) {
        const InitialState s{n};
        for (cplx k : {cplx{0.7, 0.0}, cplx{2.0, -0.4}, cplx{n * pi / 1.3, 0.0}, cplx{n * pi / 1.3 + 1e-9, 0.0},
                       cplx{9.1, -2.5}}) {
            const cplx ref = overlap_by_quadrature(k, s, p);
            CHECK(std::abs(initial_overlap(k, s, p) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("damped weight equals phi W e^{ik} where both are representable")
{
    for (double lambda : {0.65, 3.6}) {
        ModelParams p;
        p.lambda = lambda;
        for (cplx k : {cplx{1.0, -0.3}, cplx{4.4, -1.0}, cplx{12.0, -2.0}}) {
            const cplx direct = initial_overlap(k, InitialState{2}, p) / std::sqrt(2.0) * spectral_weight(k, p) *
                                std::exp(I * k);
            const cplx damped = reduced::damped_weight(k, lambda, 2);
            CHECK(std::abs(damped - direct) <= 1e-11 * std::abs(direct));
        }
    }
}

TEST_CASE("spectral weight refuses to evaluate on a pole")
{
    ModelParams p;
    p.lambda = 3.6;
    CHECK_THROWS_AS(spectral_weight(cplx{0.0, 0.0} + 1e-20, p), PoleProximityError);
}

TEST_CASE("parameter validation")
{
    ModelParams p;
    p.lambda = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.lambda = 1.0;
    p.mass = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    CHECK_THROWS_AS(InitialState{0}.validate(), DomainError);
    ModelParams zero;
    CHECK_THROWS_AS(characteristic_time(zero), DomainError);
}

TEST_CASE("tau0 formula and unit scaling")
{
    ModelParams p;
    p.lambda = 3.6;
    p.mass = 2.5;
    p.well_width = 0.4;
    p.hbar = 0.9;
    CHECK(characteristic_time(p) ==
          doctest::Approx(2.5 * std::pow(3.6 * 0.4, 2) / (2.0 * std::pow(pi, 3) * 0.9)).epsilon(1e-15));
    // D depends on k only through ka.
    ModelParams q = p;
    q.well_width = 1.0;
    CHECK(std::abs(denominator(cplx{3.0, -0.5}, p) - denominator(cplx{1.2, -0.2}, q)) <= 1e-14);
}
