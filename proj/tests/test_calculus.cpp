#include <doctest.h>

#include "test_util.hpp"
#include "xbs/calculus.hpp"
#include "xbs/eval.hpp"

using namespace xbs;
using testutil::Rng;

namespace {
Coefficient q(long long n, long long d = 1) { return Coefficient(Rational(n, d)); }
}

TEST_CASE("pair partition counts follow the double factorial") {
    CHECK(pair_partitions(2).size() == 1);
    CHECK(pair_partitions(4).size() == 3);
    CHECK(pair_partitions(6).size() == 15);
    CHECK(pair_partitions(8).size() == 105);
    CHECK(pair_partitions(3).empty());
}

TEST_CASE("expectation of four crosses is three double laplacians") {
    Series e = expectation(Series::term(root_with_crosses(4)));
    REQUIRE(e.size() == 1);
    CHECK(e.coefficient_of(root_with_self_lianas(2)) == Coefficient(3));
}

TEST_CASE("expectation pairs the two-cross drift forest into a laplacian") {
    Forest f = chain(1);
    int g1 = f.add(grafted_node(1)), g2 = f.add(grafted_node(1));
    f.add_edge(g1, 1);
    f.add_edge(g2, 1);
    Series e = expectation(Series::term(f));
    REQUIRE(e.size() == 1);
    Forest lapf = chain(1);
    lapf.add_liana(1, 1);
    CHECK(e.coefficient_of(lapf) == Coefficient(1));
}

TEST_CASE("odd numbers of crosses vanish") {
    CHECK(expectation(Series::term(root_with_crosses(1))).empty());
    CHECK(expectation(Series::term(root_with_crosses(3))).empty());
}

TEST_CASE("channel separation") {
    // two channels, even each: one pairing per channel, never across
    Forest even = bare_root();
    for (int ch : {1, 1, 2, 2}) {
        int g = even.add(grafted_node(ch));
        even.add_edge(g, 0);
    }
    Series e = expectation(Series::term(even));
    REQUIRE(e.size() == 1);
    CHECK(e.coefficient_of(root_with_self_lianas(2)) == Coefficient(1));

    // odd within a channel, even in total: still zero
    Forest odd = bare_root();
    for (int ch : {1, 1, 1, 2}) {
        int g = odd.add(grafted_node(ch));
        odd.add_edge(g, 0);
    }
    CHECK(expectation(Series::term(odd)).empty());
}

TEST_CASE("expectation is linear") {
    Rng rng(3);
    Series a(6), b(6);
    for (int t = 0; t < 3; ++t) {
        a.add(testutil::random_forest(rng, 2, 1, 2), Coefficient(testutil::random_rational(rng)));
        b.add(testutil::random_forest(rng, 2, 1, 2), Coefficient(testutil::random_rational(rng)));
    }
    CHECK(expectation(a + b) == expectation(a) + expectation(b));
}

TEST_CASE("composition with the generator reproduces the worked example") {
    Series phif = Series::term(chain(1));
    Series out = compose(phif, generator());
    Forest cherry = bare_root();
    cherry.add_edge(cherry.add(plain_node()), 0);
    cherry.add_edge(cherry.add(plain_node()), 0);
    Forest rootlap = chain(1);
    rootlap.add_liana(0, 0);
    REQUIRE(out.size() == 3);
    CHECK(out.coefficient_of(chain(2)) == Coefficient(1));
    CHECK(out.coefficient_of(cherry) == Coefficient(1));
    CHECK(out.coefficient_of(rootlap) == q(1, 2) * sigma2());
}

TEST_CASE("bare root is the identity for composition") {
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        Series s = Series::term(testutil::random_forest(rng, 2, 1), Coefficient(Rational(3, 7)));
        CHECK(compose(Series::term(bare_root()), s) == s);
        CHECK(compose(s, Series::term(bare_root())) == s);
    }
}

TEST_CASE("generator powers match the displayed L^2") {
    Series L2 = generator_power(2, 8);
    REQUIRE(L2.size() == 6);
    Forest cherry = bare_root();
    cherry.add_edge(cherry.add(plain_node()), 0);
    cherry.add_edge(cherry.add(plain_node()), 0);
    Forest lapf = chain(1);
    lapf.add_liana(1, 1);
    Forest mixed = chain(1);
    mixed.add_liana(0, 1);
    Forest rootlap = chain(1);
    rootlap.add_liana(0, 0);
    CHECK(L2.coefficient_of(chain(2)) == Coefficient(1));
    CHECK(L2.coefficient_of(cherry) == Coefficient(1));
    CHECK(L2.coefficient_of(rootlap) == sigma2());
    CHECK(L2.coefficient_of(lapf) == q(1, 2) * sigma2());
    CHECK(L2.coefficient_of(mixed) == sigma2());
    CHECK(L2.coefficient_of(root_with_self_lianas(2)) == q(1, 4) * sigma2() * sigma2());
}

TEST_CASE("partitioned generator carries the white drift") {
    Series L = generator(true);
    CHECK(L.coefficient_of(chain(1)) == Coefficient(1));
    CHECK(L.coefficient_of(chain(1, {NodeKind::white})) == Coefficient(1));
    CHECK(L.coefficient_of(root_with_self_lianas(1)) == q(1, 2) * sigma2());
}

TEST_CASE("lie bracket of a series with itself vanishes") {
    Series L = generator().truncated(6);
    CHECK(lie_bracket(L, L).empty());
    CHECK(lie_bracket(L, Series::term(bare_root())).empty());
}

TEST_CASE("composition is associative on small series") {
    Rng rng(17);
    std::vector<Series> pool;
    pool.push_back(generator().truncated(8));
    pool.push_back(Series::term(chain(1), q(2, 3), 8));
    Series two(8);
    two.add(root_with_self_lianas(1), q(1, 3));
    two.add(chain(2), q(1, 2));
    pool.push_back(two);
    for (const auto &a : pool)
        for (const auto &b : pool)
            for (const auto &c : pool) {
                Series lhs = compose(compose(a, b), c).truncated(6);
                Series rhs = compose(a, compose(b, c)).truncated(6);
                CHECK(lhs == rhs);
            }
    (void)rng;
}

TEST_CASE("expectation equals the moment oracle on grafted forests") {
    Rng rng(23);
    PolySpec data;
    data.dim = 2;
    data.f = {testutil::random_polynomial(rng, 2, 2), testutil::random_polynomial(rng, 2, 2)};
    data.phi = testutil::random_polynomial(rng, 2, 3);
    std::vector<Rational> x = testutil::random_point(rng, 2);
    Rational sigma = 1;

    auto forests = enumerate_forests(4, {NodeKind::root, NodeKind::plain, NodeKind::grafted},
                                     {.lianas = true}, 2);
    int checked = 0;
    for (const auto &f : forests) {
        bool has_cross = false;
        for (const auto &nd : f.nodes)
            has_cross |= nd.kind == NodeKind::grafted;
        if (!has_cross)
            continue;
        Rational pairing = 0;
        Series paired = expectation(Series::term(f));
        for (const auto &[g, c] : paired.terms())
            pairing += c.constant_value().rational() * eval_forest(g, data, sigma, x);
        CHECK(pairing == gaussian_expectation_oracle(f, data, sigma, x));
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("composition equals direct operator application") {
    Rng rng(29);
    PolySpec data;
    data.dim = 2;
    data.f = {testutil::random_polynomial(rng, 2, 2), testutil::random_polynomial(rng, 2, 2)};
    data.phi = testutil::random_polynomial(rng, 2, 3);
    std::vector<Rational> x = testutil::random_point(rng, 2);
    Rational sigma = 1;

    auto pool = enumerate_forests(4, {NodeKind::root, NodeKind::plain}, {.lianas = true});
    int checked = 0;
    for (const auto &outer : pool)
        for (const auto &inner : pool) {
            // oracle: outer applied to the polynomial G = F(inner)(phi)
            PolySpec shifted = data;
            shifted.phi = differential_polynomial(inner, data, sigma);
            Rational direct = eval_forest(outer, shifted, sigma, x);
            Rational composed =
                eval_series(compose(Series::term(outer), Series::term(inner)), data, sigma, x);
            CHECK(composed == direct);
            ++checked;
        }
    CHECK(checked == 81);
}
