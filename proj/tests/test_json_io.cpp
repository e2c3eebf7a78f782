#include <doctest.h>

#include "test_util.hpp"
#include "xbs/json_io.hpp"

using namespace xbs;
using testutil::Rng;

TEST_CASE("forest json round-trips") {
    Rng rng(3);
    for (int t = 0; t < 30; ++t) {
        Forest f = testutil::random_forest(rng, 3, 2, t % 3, t % 4 == 0);
        Forest back = forest_from_json(to_json(f));
        CHECK(back == f);
    }
    // the documented shape parses
    json j = json::parse(R"({"nodes":[{"id":0,"kind":"root"},{"id":1,"kind":"plain"}],
                            "edges":[[1,0]],"lianas":[[1,1]]})");
    Forest f = forest_from_json(j);
    CHECK(f.size() == 2);
    CHECK(grade2(f) == 4);
}

TEST_CASE("series json round-trips with symbolic coefficients") {
    Series s(4);
    s.add(chain(1), Coefficient::parse("1/2*sigma^2"));
    s.add(root_with_self_lianas(1), Coefficient::generator("theta") * Coefficient(Rational(3, 7)));
    Series back = series_from_json(to_json(s));
    CHECK(back == s);
}

TEST_CASE("scheme json round-trips including partitions and postprocessors") {
    for (const Scheme &s : {euler_maruyama(), partitioned_example(), non_reversible_example(),
                            postprocessed_implicit_example()}) {
        Scheme back = scheme_from_json(to_json(s));
        json again = to_json(back);
        CHECK(again == to_json(s));
        CHECK(back.exact() == s.exact());
    }
    // a '.' selects double mode for the whole scheme
    json j = json::parse(R"({"s":1,"A":[["0"]],"b":["1.0"],"d":[["0"]],"update_noise":["1"]})");
    CHECK(!scheme_from_json(j).exact());
    json j2 = json::parse(R"({"s":1,"A":[["0"]],"b":["1"],"d":[["0"]],"update_noise":["1"]})");
    CHECK(scheme_from_json(j2).exact());
}

TEST_CASE("the documented tableau shape parses") {
    json j = json::parse(R"({"s":2,"A":[["0","0"],["1/2","1/2"]],"b":["1/2","1/2"],
                            "d":[["0"],["1"]],"update_noise":["1"]})");
    Scheme s = scheme_from_json(j);
    CHECK(s.main.tableau.s == 2);
    CHECK(s.main.tableau.c()[1] == Coefficient(1));
}

TEST_CASE("polyspec json round-trips") {
    json j = json::parse(R"({"dim":2,"potential":"x1^2/2 + x1^4/4 + x2^2/2","phi":"x1^2",
                            "f2_skew":[[0,1],[-1,0]]})");
    PolySpec p = polyspec_from_json(j);
    CHECK(p.dim == 2);
    CHECK(p.potential);
    auto f = p.drift();
    CHECK(f[0] == Polynomial::parse("0 - x1 - x1^3", 2));
    auto f2 = p.white_drift(); // J grad V
    CHECK(f2[0] == Polynomial::parse("x2", 2));
    CHECK(f2[1] == Polynomial::parse("0 - x1 - x1^3", 2));
    PolySpec back = polyspec_from_json(to_json(p));
    CHECK(to_json(back) == to_json(p));
}

TEST_CASE("study json configures the sampler") {
    json j = json::parse(R"({"scheme":{"s":1,"A":[["0"]],"b":["1"],"d":[["0"]],
                             "update_noise":["1"]},
                            "polyspec":{"dim":1,"potential":"x1^2/2","phi":"x1^2"},
                            "sigma2":"2","h":[0.1,0.2],"steps":50000,"chains":4,
                            "seed":7,"burn_in":0.2})");
    MCSpec m = mcspec_from_json(j);
    CHECK(m.sigma2 == Rational(2));
    CHECK(m.step_sizes.size() == 2);
    CHECK(m.chains == 4);
    m.validate();
}

TEST_CASE("condition sets serialize with pretty forms") {
    auto cs = invariant_measure_conditions({SchemeClassKind::rk, 1}, 2, Assumption::gradient_f);
    json j = to_json(cs);
    CHECK(j.at("equations").size() == cs.equations.size());
    CHECK(j.at("assumption") == "gradient");
    for (const auto &e : j.at("equations")) {
        CHECK(e.contains("pretty"));
        CHECK(e.at("rhs") == "0");
        // lhs strings parse back through the coefficient grammar
        Coefficient c = Coefficient::parse(e.at("lhs").get<std::string>());
        CHECK(!c.is_zero());
    }
}

TEST_CASE("residual reports carry renderings") {
    Series red = reduce(Series::term(root_with_self_lianas(2)), Assumption::general);
    json r = residual_report(red);
    CHECK(r.size() == 4);
    for (const auto &item : r)
        CHECK(item.contains("rendered"));
}
