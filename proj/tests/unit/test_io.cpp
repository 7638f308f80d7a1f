#include "deltashell/errors.hpp"
#include "deltashell/io.hpp"

#include <doctest.h>

using namespace deltashell;

TEST_CASE("FNV-1a reference vectors")
{
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("configs round-trip through JSON")
{
    PropagatorConfig p;
    p.quadrature.abs_tol = 3e-9;
    p.poles.pole_count = 17;
    p.rule = SpatialRule::simpson;
    PropagatorConfig q;
    from_json(to_json(p), q);
    CHECK(to_json(q) == to_json(p));
    CHECK(q.rule == SpatialRule::simpson);

    PowerLawWindow w;
    PowerLawWindow w2;
    w2.t_max = 5.0;
    from_json(to_json(w), w2);
    CHECK(std::isinf(w2.t_max));

    TdseConfig t;
    t.absorber.strength = 7.0;
    TdseConfig t2;
    from_json(to_json(t), t2);
    CHECK(t2.absorber.strength == 7.0);
}

TEST_CASE("unknown or mistyped keys are rejected")
{
    PropagatorConfig p;
    CHECK_THROWS_AS(from_json(json{{"quadrature", {{"abs_toll", 1e-3}}}}, p), DomainError);
    CHECK_THROWS_AS(from_json(json{{"grid_intervals", "many"}}, p), DomainError);
    ExponentialWindow w;
    CHECK_THROWS_AS(from_json(json{{"policy", "median"}}, w), DomainError);
}

TEST_CASE("survival CSV schema and provenance header")
{
    SurvivalSeries s;
    s.params.lambda = 3.6;
    s.push_back({0.0, 1.0, std::nan(""), std::nan(""), std::nan(""), 0.0});
    s.push_back({0.5, 0.9, 0.01, 0.95, -0.06, 1e-12});
    Provenance prov{"survival", json{{"x", 1}}};
    const auto csv = survival_csv(s, prov, 2.0);
    CHECK(csv.rfind("# deltashell ", 0) == 0);
    CHECK(csv.find("# config_hash: fnv1a64:" + hex64(fnv1a(R"({"x":1})"))) != std::string::npos);
    CHECK(csv.find("\nt,t_over_tau0,p_total,p_bg,p_poles,p_interf,err_est,t_over_tau_fit\n") != std::string::npos);
    CHECK(csv.find("0,0,1,nan,nan,nan,0,0\n") != std::string::npos);
    const auto j = survival_json(s, prov);
    CHECK(j["rows"][0]["p_bg"].is_null());
    CHECK(j["metadata"]["lambda"] == 3.6);
}

TEST_CASE("poles CSV schema")
{
    ModelParams p;
    p.lambda = 3.6;
    const auto poles = find_poles(p, 3);
    const auto csv = poles_csv(poles, p, Provenance{"poles", json::object()});
    CHECK(csv.find("\nn,re_k,im_k,gamma,tau_over_tau0,q_value,residual\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4 + 1 + 3);
}

TEST_CASE("number formatting round-trips")
{
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300})
        CHECK(std::stod(fmt(v)) == v);
    CHECK(fmt(std::nan("")) == "nan");
}

TEST_CASE("aligned text table")
{
    TextTable t({"a", "long header"});
    t.add({"12345", "x"});
    const auto s = t.str();
    CHECK(s == "a      long header\n------------------\n12345  x\n");
}
