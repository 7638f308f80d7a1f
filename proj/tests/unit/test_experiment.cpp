#include "deltashell/errors.hpp"
#include "deltashell/experiment.hpp"

#include <doctest.h>

#include <string>

using namespace deltashell;

namespace {

std::string well_formed(int rows)
{
    std::string s = "t_ns,intensity\n";
    for (int i = 0; i < rows; ++i)
        s += std::to_string(0.5 * i) + "," + std::to_string(1000.0 * std::exp(-0.5 * i / 3.9)) + "\n";
    return s;
}

std::string error_of(const std::string& text)
{
    try {
        parse_decay_csv(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("well-formed decay file")
{
    const auto e = parse_decay_csv("# comment\n" + well_formed(25), Normalization::first);
    CHECK(e.size() == 25);
    CHECK(e.normalized.front() == 1.0);
    CHECK(e.reference == doctest::Approx(1000.0));
}

TEST_CASE("malformed rows are rejected with their line number")
{
    std::string bad = well_formed(12);
    bad += "6.5,-3\n";
    const auto msg = error_of(bad);
    CHECK(msg.find(":14:") != std::string::npos);
    CHECK(msg.find("negative intensity") != std::string::npos);

    CHECK(error_of(well_formed(9)).find("at least 10") != std::string::npos);
    CHECK(error_of(well_formed(12) + "1.0,5\n").find("strictly increasing") != std::string::npos);
    CHECK(error_of("time,counts\n1,2\n").find("header") != std::string::npos);
    CHECK(error_of(well_formed(12) + "7,abc\n").find("malformed") != std::string::npos);
    CHECK(error_of(well_formed(12) + "7,1,2\n").find("two comma-separated") != std::string::npos);
}

TEST_CASE("peak versus first-point normalization")
{
    std::vector<double> t, i;
    for (int k = 0; k < 12; ++k) {
        t.push_back(k);
        i.push_back(k == 2 ? 50.0 : 10.0);
    }
    CHECK(make_experiment(t, i, Normalization::peak).reference == 50.0);
    CHECK(make_experiment(t, i, Normalization::first).reference == 10.0);
}

TEST_CASE("synthetic model curve round-trips through ingestion")
{
    std::vector<double> t{0.0};
    for (int k = 0; k < 40; ++k)
        t.push_back(0.2 * std::pow(1.15, k));
    const auto syn = synthetic_experiment(3.6, t, 3.9, 0.0, 1);
    const auto back = parse_decay_csv(format_decay_csv(syn), Normalization::first);
    REQUIRE(back.size() == syn.size());
    for (std::size_t k = 0; k < syn.size(); ++k) {
        CHECK(back.times_ns[k] == syn.times_ns[k]);
        CHECK(back.intensities[k] == syn.intensities[k]);
    }
    CHECK(syn.intensities.front() == 1.0);
}

TEST_CASE("synthetic noise is seeded")
{
    std::vector<double> t;
    for (int k = 0; k < 12; ++k)
        t.push_back(0.5 * k);
    const auto a = synthetic_experiment(3.6, t, 3.9, 0.02, 7);
    const auto b = synthetic_experiment(3.6, t, 3.9, 0.02, 7);
    const auto c = synthetic_experiment(3.6, t, 3.9, 0.02, 8);
    CHECK(a.intensities == b.intensities);
    CHECK(a.intensities != c.intensities);
}

TEST_CASE("lambda scan refuses an experiment without both regimes")
{
    std::vector<double> t, i;
    for (int k = 0; k < 30; ++k) {
        t.push_back(0.1 * k);
        i.push_back(std::exp(-0.1 * k / 3.9));
    }
    CHECK_THROWS_AS(lambda_scan(make_experiment(t, i), {3.6}, {}), DataError);
}

TEST_CASE("lambda scan with a one-element grid returns that lambda")
{
    std::vector<double> t{0.0};
    const auto lt = log_times(0.05, 300.0, 80);
    t.insert(t.end(), lt.begin(), lt.end());
    const auto exp = synthetic_experiment(3.6, t, 3.9, 0.0, 1);
    ScanConfig cfg;
    cfg.curve_lambdas.clear();
    const auto r = lambda_scan(exp, {3.4}, {}, cfg);
    CHECK(r.best_lambda == 3.4);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].sse > 0.0);
    CHECK(r.rows[0].points == exp.size());
}

TEST_CASE("scale mapping: linear in tau_exp and independent of the unit system")
{
    const double v = scale_mapping(3.6, 3.55, 3.9);
    CHECK(scale_mapping(3.6, 3.55, 7.8) == doctest::Approx(2.0 * v).epsilon(1e-15));
    CHECK(scale_mapping(7.2, 3.55, 3.9) == doctest::Approx(v / 4.0).epsilon(1e-15));

    // Re-express every constant in units of (M, L, T).
    const double M = 1.66053906660e-27, L = 1e-10, T = 1e-15;
    PhysicalConstants c;
    PhysicalConstants u;
    u.hbar = c.hbar * T / (M * L * L);
    u.proton_mass = c.proton_mass / M;
    u.bohr_radius = c.bohr_radius / L;
    u.nanosecond = c.nanosecond / T;
    CHECK(std::abs(scale_mapping(3.6, 3.55, 3.9, u) / v - 1.0) <= 1e-12);
    CHECK_THROWS_AS(scale_mapping(0.0, 3.55, 3.9), DomainError);
}
