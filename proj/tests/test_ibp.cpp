#include <doctest.h>

#include "test_util.hpp"
#include "xbs/calculus.hpp"
#include "xbs/conditions.hpp"
#include "xbs/eval.hpp"
#include "xbs/ibp.hpp"

using namespace xbs;
using testutil::Rng;

namespace {

Coefficient q(long long n, long long d = 1) { return Coefficient(Rational(n, d)); }

Forest cherry() {
    Forest f = bare_root();
    f.add_edge(f.add(plain_node()), 0);
    f.add_edge(f.add(plain_node()), 0);
    return f;
}

Forest div_aroma_with(const Forest &tree) {
    Forest f = tree;
    int v = f.add(plain_node());
    f.add_edge(v, v);
    return f;
}

Forest gprime_f_with(const Forest &tree) {
    Forest f = tree;
    int a = f.add(plain_node());
    int s = f.add(square_node());
    f.add_edge(a, s);
    return f;
}

} // namespace

TEST_CASE("ibp of the double-child forest reproduces the worked sum") {
    Forest ch = cherry();
    Series out = ibp_step(ch, first_connection(ch));
    REQUIRE(out.size() == 3);
    CHECK(out.coefficient_of(chain(2)) == q(-1));
    CHECK(out.coefficient_of(div_aroma_with(chain(1))) == q(-1));
    CHECK(out.coefficient_of(gprime_f_with(chain(1))) == q(-1));
}

TEST_CASE("ibp of the index-coupled chain") {
    // root -- liana -- f with edge: unplug the liana endpoint at the root
    Forest f = chain(1);
    f.add_liana(0, 1);
    Connection c{true, 0, 0};
    Series out = ibp_step(canonicalize(f), first_connection(canonicalize(f)));
    // -phi' Lap f - (square liana-coupled to f)
    Forest lapf = chain(1);
    lapf.add_liana(1, 1);
    REQUIRE(out.size() == 2);
    CHECK(out.coefficient_of(lapf) == q(-1));
    Forest gt = chain(1);
    int s = gt.add(square_node());
    gt.add_liana(1, s);
    CHECK(out.coefficient_of(gt) == q(-1));
    (void)c;
}

TEST_CASE("ibp of the bare laplacian moves one endpoint to a fresh square") {
    Forest lap = root_with_self_lianas(1);
    Series out = ibp_step(lap, Connection{true, 0, 0});
    REQUIRE(out.size() == 1);
    Forest gt = bare_root();
    int s = gt.add(square_node());
    gt.add_liana(0, s);
    CHECK(out.coefficient_of(gt) == q(-1));
}

TEST_CASE("ibp errors") {
    CHECK_THROWS_AS(ibp_step(bare_root(), Connection{false, 0, 0}), BareRoot);
    Forest f = chain(2);
    CHECK_THROWS_AS(ibp_step(f, Connection{false, 1, 0}), NotIncident); // top edge
    CHECK_THROWS_AS(first_connection(bare_root()), BareRoot);
}

TEST_CASE("gradient rewrite identifies symmetry-equivalent patterns") {
    // Sum phi''(e_i, f'f'(e_i)) and Sum phi''(f'(e_i), f'(e_i)) represent the
    // same differential when f is a gradient
    Forest a = chain(2);
    a.add_liana(0, 2);
    Forest b = bare_root();
    {
        int u = b.add(plain_node());
        int v = b.add(plain_node());
        b.add_edge(u, 0);
        b.add_edge(v, 0);
        b.add_liana(u, v);
    }
    auto [ra, ca] = gradient_rewrite(a, Assumption::gradient_f);
    auto [rb, cb] = gradient_rewrite(b, Assumption::gradient_f);
    CHECK(ca == Coefficient(1));
    CHECK(cb == Coefficient(1));
    CHECK(ra == rb);

    // but they stay distinct without the gradient assumption
    CHECK(!isomorphic(a, b));
}

TEST_CASE("gradient rewrite eliminates liana-coupled squares") {
    // square joined by a liana to the drift node of phi'f -> (2/sigma^2) phi'f'f
    Forest f = chain(1);
    int s = f.add(square_node());
    f.add_liana(1, s);
    auto [r, c] = gradient_rewrite(f, Assumption::gradient_f);
    CHECK(r == canonicalize(chain(2)));
    CHECK(c == q(2) * Coefficient::sigma_power(-2));
}

TEST_CASE("gradient rewrite turns the laplacian-of-g aroma into a divergence") {
    Forest f = bare_root();
    int s = f.add(square_node());
    f.add_liana(s, s);
    auto [r, c] = gradient_rewrite(f, Assumption::gradient_f);
    CHECK(c == q(2) * Coefficient::sigma_power(-2));
    CHECK(r == canonicalize(div_aroma_with(bare_root())));
}

TEST_CASE("rewrite soundness: both sides evaluate equal on gradient data") {
    Rng rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        PolySpec data;
        data.dim = 2;
        data.potential = testutil::random_polynomial(rng, 2, 3);
        data.phi = testutil::random_polynomial(rng, 2, 3);
        Rational sigma = 1;

        Forest f = chain(2);
        int s = f.add(square_node());
        f.add_liana(1, s);
        Series rewritten = gradient_rewrite_series(f, Assumption::gradient_f);
        for (int pt = 0; pt < 5; ++pt) {
            std::vector<Rational> x = testutil::random_point(rng, 2);
            CHECK(eval_forest(f, data, sigma, x) == eval_series(rewritten, data, sigma, x));
        }
    }
}

TEST_CASE("whites are rejected under the plain gradient assumption") {
    Forest f = chain(1, {NodeKind::white});
    CHECK_THROWS_AS(reduce(Series::term(f), Assumption::gradient_f), AssumptionMismatch);
}

TEST_CASE("reduce of the double laplacian under no assumptions: the f-tilde shape") {
    Series red = reduce(Series::term(root_with_self_lianas(2)), Assumption::general);
    REQUIRE(red.size() == 4);
    // -phi'(grad Lap g) - Lap g (g' phi') - 2 phi'(g'' grad g) - |grad g|^2 (g' phi')
    Forest t1 = bare_root();
    {
        int s = t1.add(square_node());
        t1.add_liana(0, s);
        t1.add_liana(s, s);
    }
    CHECK(red.coefficient_of(t1) == q(-1));
    Forest t2 = bare_root();
    {
        int s1 = t2.add(square_node());
        t2.add_liana(0, s1);
        int s2 = t2.add(square_node());
        t2.add_liana(s2, s2);
    }
    CHECK(red.coefficient_of(t2) == q(-1));
    Forest t3 = bare_root();
    {
        int s1 = t3.add(square_node());
        int s2 = t3.add(square_node());
        t3.add_liana(0, s1);
        t3.add_liana(s1, s2);
    }
    CHECK(red.coefficient_of(t3) == q(-2));
    Forest t4 = bare_root();
    {
        int s1 = t4.add(square_node());
        t4.add_liana(0, s1);
        int s2 = t4.add(square_node());
        int s3 = t4.add(square_node());
        t4.add_liana(s2, s3);
    }
    CHECK(red.coefficient_of(t4) == q(-1));
}

TEST_CASE("reduce of the root-self-liana chain matches the chained display") {
    // <2113> ~ <2111> + 2 gtree + (Lap g).(phi'f) + |grad g|^2.(phi'f), i.e.
    // under the gradient rules everything collapses onto phi'Lap f and chains
    Forest f = chain(1);
    f.add_liana(0, 0);
    Series red = reduce(Series::term(f), Assumption::general);
    Forest lapf = chain(1);
    lapf.add_liana(1, 1);
    CHECK(red.coefficient_of(lapf) == q(1));
    Forest gt = chain(1);
    int s = gt.add(square_node());
    gt.add_liana(1, s);
    CHECK(red.coefficient_of(gt) == q(2));
    REQUIRE(red.size() == 4);
}

TEST_CASE("generic grade-one reduction gives the order-one bracket") {
    Series g1(2);
    g1.add(chain(1), Coefficient::generator("c1"));
    g1.add(root_with_self_lianas(1), Coefficient::generator("c2"));
    Series red = reduce(g1, Assumption::gradient_f);
    REQUIRE(red.size() == 1);
    CHECK(red.coefficient_of(chain(1)) ==
          Coefficient::generator("c1") -
              q(2) * Coefficient::sigma_power(-2) * Coefficient::generator("c2"));
}

TEST_CASE("equivalent zero records the right verdicts") {
    auto [z1, w1] = equivalent_zero(generator().truncated(8), Assumption::gradient_f);
    CHECK(z1);
    CHECK(w1.empty());

    auto [z2, w2] = equivalent_zero(Series::term(chain(1)), Assumption::gradient_f);
    CHECK(!z2);
    CHECK(w2.coefficient_of(chain(1)) == q(1));

    for (int k = 1; k <= 3; ++k) {
        auto [zk, wk] = equivalent_zero(generator_power(k, 8), Assumption::gradient_f);
        CHECK(zk);
    }
}

TEST_CASE("reduce is idempotent and linear") {
    Rng rng(53);
    for (int t = 0; t < 8; ++t) {
        Series a(4), b(4);
        for (int k = 0; k < 2; ++k) {
            a.add(testutil::random_forest(rng, 2, 1), Coefficient(testutil::random_rational(rng)));
            b.add(testutil::random_forest(rng, 2, 1), Coefficient(testutil::random_rational(rng)));
        }
        Series ra = reduce(a, Assumption::gradient_f);
        CHECK(reduce(ra, Assumption::gradient_f) == ra);
        CHECK(reduce(a + b, Assumption::gradient_f) == ra + reduce(b, Assumption::gradient_f));
    }
}

TEST_CASE("reduction strategy independence on small forests") {
    // alternative strategy: edges before lianas; same reduced series
    auto alt_reduce_forest = [](Forest f) {
        Series out(Series::unbounded);
        std::vector<std::pair<Forest, Coefficient>> work{{canonicalize(f), Coefficient(1)}};
        while (!work.empty()) {
            auto [g, c] = work.back();
            work.pop_back();
            auto root = g.root();
            if (root && g.connection_degree(*root) > 1) {
                Connection conn{false, 0, 0};
                bool found = false;
                for (size_t e = 0; e < g.edges.size() && !found; ++e)
                    if (g.edges[e][1] == *root) {
                        conn = Connection{false, static_cast<int>(e), 0};
                        found = true;
                    }
                if (!found)
                    conn = first_connection(g);
                Series step = ibp_step(g, conn);
                for (const auto &[h, m] : step.terms())
                    work.emplace_back(h, c * m);
            } else {
                Series norm = gradient_rewrite_series(g, Assumption::gradient_f);
                for (const auto &[h, m] : norm.terms())
                    out.add(h, c * m);
            }
        }
        return out;
    };
    for (const auto &f : enumerate_forests(4, {NodeKind::root, NodeKind::plain}, {.lianas = true})) {
        if (grade2(f) == 0)
            continue;
        Series lhs = reduce(Series::term(f), Assumption::gradient_f);
        Series rhs = alt_reduce_forest(f);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("protected forests pass through and absorb the residue") {
    SymbolicClass rk;
    Series A1 = expectation(expand_grafted_symbolic(rk, 4).graded_part(4));
    Series with = reduce(A1, Assumption::gradient_f, {cherry()});
    Series without = reduce(A1, Assumption::gradient_f, {});
    // both are equivalent: their difference reduces to zero
    auto [zero, witness] = equivalent_zero(with - without, Assumption::gradient_f);
    CHECK(zero);
    // and the protected variant is clean apart from the kept forest itself
    for (const auto &[f, c] : with.terms())
        CHECK((is_clean_basis_forest(f) || f == canonicalize(cherry())));
}
