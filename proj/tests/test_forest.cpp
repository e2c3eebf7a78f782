#include <doctest.h>

#include "test_util.hpp"
#include "xbs/forest.hpp"

using namespace xbs;
using testutil::Rng;

TEST_CASE("validation accepts the bare root") {
    CHECK(validate(bare_root()).empty());
}

TEST_CASE("validation flags grafted nodes with lianas") {
    Forest f = bare_root();
    int g = f.add(grafted_node(1));
    f.add_edge(g, 0);
    f.add_liana(g, 0);
    auto bad = validate(f);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].find("liana") != std::string::npos);
}

TEST_CASE("validation flags out-degree above one") {
    Forest f = bare_root();
    int a = f.add(plain_node());
    int b = f.add(plain_node());
    f.add_edge(a, 0);
    f.add_edge(a, b);
    auto bad = validate(f);
    CHECK(!bad.empty());
    CHECK(bad[0].find("out-degree") != std::string::npos);
}

TEST_CASE("validation flags two cycles in one component") {
    Forest f;
    int a = f.add(plain_node());
    int b = f.add(plain_node());
    f.add_edge(a, a);
    f.add_edge(b, b);
    f.add_liana(a, b); // lianas do not merge directed components
    CHECK(validate(f).empty());
}

TEST_CASE("canonicalize is label-invariant and idempotent") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        Forest f = testutil::random_forest(rng, 3, 2, trial % 3, trial % 5 == 0);
        Forest c1 = canonicalize(f);
        Forest c2 = canonicalize(testutil::relabel(f, rng));
        CHECK(c1 == c2);
        CHECK(canonicalize(c1) == c1);
        CHECK(grade2(f) == grade2(c1));
    }
}

TEST_CASE("canonicalize distinguishes the two order-2 shapes") {
    Forest chain2 = chain(2);
    Forest cherry = bare_root();
    cherry.add_edge(cherry.add(plain_node()), 0);
    cherry.add_edge(cherry.add(plain_node()), 0);
    CHECK(!isomorphic(chain2, cherry));
    CHECK(canonical_key(chain2) != canonical_key(cherry));
}

TEST_CASE("self-liana forests canonicalize equal under relabeling") {
    Forest f = root_with_self_lianas(1);
    Rng rng(7);
    CHECK(canonicalize(f) == canonicalize(testutil::relabel(f, rng)));
}

TEST_CASE("grading") {
    CHECK(grade2(bare_root()) == 0);
    CHECK(grade2(chain(1)) == 2);
    Forest f = chain(1);
    int g1 = f.add(grafted_node(1)), g2 = f.add(grafted_node(1));
    f.add_edge(g1, 1);
    f.add_edge(g2, 1);
    CHECK(grade2(f) == 4); // |gamma| = 2
    // squares are grade-free
    Forest s = chain(1);
    int sq = s.add(square_node());
    s.add_liana(sq, 1);
    CHECK(grade2(s) == 4); // one drift node + one liana
}

TEST_CASE("grade is isomorphism invariant") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        Forest f = testutil::random_forest(rng, 3, 2, 1);
        CHECK(grade2(f) == grade2(testutil::relabel(f, rng)));
    }
}

TEST_CASE("enumeration matches the hand counts at grade one") {
    auto plain = enumerate_forests(2, {NodeKind::root, NodeKind::plain});
    REQUIRE(plain.size() == 2); // bare root; root <- f
    CHECK(plain[0] == bare_root());

    auto with_lianas = enumerate_forests(2, {NodeKind::root, NodeKind::plain}, {.lianas = true});
    CHECK(with_lianas.size() == 3); // adds the laplacian

    auto just_root = enumerate_forests(0, {NodeKind::root});
    REQUIRE(just_root.size() == 1);
    CHECK(just_root[0] == bare_root());
}

TEST_CASE("enumeration is duplicate-free against brute force") {
    auto fs = enumerate_forests(6, {NodeKind::root, NodeKind::plain, NodeKind::grafted},
                                {.lianas = true});
    for (size_t i = 0; i < fs.size(); ++i)
        for (size_t j = i + 1; j < fs.size(); ++j) {
            if (fs[i].size() <= 7 && fs[j].size() <= 7)
                CHECK(!isomorphic_brute_force(fs[i], fs[j]));
            CHECK(!(canonical_key(fs[i]) == canonical_key(fs[j])));
        }
}

TEST_CASE("brute-force and refined isomorphism agree on random pairs") {
    Rng rng(1234);
    for (int t = 0; t < 60; ++t) {
        Forest a = testutil::random_forest(rng, 3, 2);
        Forest b = (t % 2 == 0) ? testutil::relabel(a, rng) : testutil::random_forest(rng, 3, 2);
        CHECK(isomorphic(a, b) == isomorphic_brute_force(a, b));
    }
}

TEST_CASE("rendering the named differentials") {
    CHECK(render_differential(chain(2)) == "φ'(f'(f))");
    Forest lap_f = chain(1);
    lap_f.add_liana(1, 1);
    CHECK(render_differential(lap_f) == "φ'(Δf)");
    // square with an incoming edge beside a rooted chain renders a g factor
    Forest f = chain(1);
    int a = f.add(plain_node());
    int sq = f.add(square_node());
    f.add_edge(a, sq);
    std::string r = render_differential(f);
    CHECK(r.find("g'(f)") != std::string::npos);
    CHECK(render_differential(root_with_self_lianas(1)) == "Δφ");
}

TEST_CASE("enumeration rejects cutoffs beyond the supported grade") {
    CHECK_THROWS_AS(enumerate_forests(9, {NodeKind::root, NodeKind::plain}), CutoffTooLarge);
}
