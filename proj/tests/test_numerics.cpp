#include <doctest.h>

#include "test_util.hpp"
#include "xbs/calculus.hpp"
#include "xbs/ibp.hpp"
#include "xbs/quadrature.hpp"

using namespace xbs;
using testutil::Rng;

namespace {
PolySpec quartic_well_1d() {
    PolySpec d;
    d.dim = 1;
    d.potential = Polynomial::parse("x1^2/2 + x1^4/4", 1);
    d.phi = Polynomial::parse("x1^2", 1);
    return d;
}
} // namespace

TEST_CASE("hand-evaluated differentials") {
    PolySpec d;
    d.dim = 1;
    d.f = {Polynomial::parse("x1^2", 1)};
    d.phi = Polynomial::parse("x1^3", 1);
    // phi'(f) at x=2: 3*4 * 4 = 48
    CHECK(eval_forest(chain(1), d, 1, {Rational(2)}) == Rational(48));

    PolySpec d2;
    d2.dim = 2;
    d2.phi = Polynomial::parse("x1^2 + 3*x2^2", 2);
    CHECK(eval_forest(root_with_self_lianas(1), d2, 1, {Rational(5), Rational(-7)}) ==
          Rational(8));
}

TEST_CASE("aroma products factor over components") {
    Rng rng(3);
    PolySpec d;
    d.dim = 2;
    d.f = {testutil::random_polynomial(rng, 2, 2), testutil::random_polynomial(rng, 2, 2)};
    d.phi = testutil::random_polynomial(rng, 2, 2);
    std::vector<Rational> x = testutil::random_point(rng, 2);

    Forest combined = chain(1); // div(f) . phi'(f)
    int v = combined.add(plain_node());
    combined.add_edge(v, v);

    Forest aroma_only;
    {
        int w = aroma_only.add(plain_node());
        aroma_only.add_edge(w, w);
        int r = aroma_only.add(root_node());
        (void)r;
    }
    // evaluate the aroma alone against phi = 1
    PolySpec aroma_data = d;
    aroma_data.phi = Polynomial(2, Rational(1));
    Rational divf = eval_forest(aroma_only, aroma_data, 1, x);
    Rational tree = eval_forest(chain(1), d, 1, x);
    CHECK(eval_forest(combined, d, 1, x) == divf * tree);
}

TEST_CASE("moment oracle on the four-cross forest") {
    PolySpec d;
    d.dim = 1;
    d.phi = Polynomial::parse("x1^4", 1);
    // phi'''' = 24; E[xi^4] = 3
    CHECK(gaussian_expectation_oracle(root_with_crosses(4), d, 1, {Rational(0)}) == Rational(72));
    CHECK(gaussian_expectation_oracle(root_with_crosses(1), d, 1, {Rational(0)}) == Rational(0));
}

TEST_CASE("moment oracle agrees with the paired forest") {
    Rng rng(9);
    PolySpec d;
    d.dim = 2;
    d.f = {testutil::random_polynomial(rng, 2, 2), testutil::random_polynomial(rng, 2, 2)};
    d.phi = testutil::random_polynomial(rng, 2, 3);
    std::vector<Rational> x = testutil::random_point(rng, 2);

    Forest f = chain(1);
    int g1 = f.add(grafted_node(1)), g2 = f.add(grafted_node(1));
    f.add_edge(g1, 1);
    f.add_edge(g2, 1);
    Forest lapf = chain(1);
    lapf.add_liana(1, 1);
    CHECK(gaussian_expectation_oracle(f, d, 1, x) == eval_forest(lapf, d, 1, x));
}

TEST_CASE("stationarity: the generator integrates to zero") {
    PolySpec d = quartic_well_1d();
    QuadratureSpec q{1, 6.0, 128};
    double v = series_integral(generator().truncated(4), d, 1, q);
    CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("integration by parts preserves the integral") {
    PolySpec d = quartic_well_1d();
    QuadratureSpec q{1, 6.0, 128};

    // the worked double-child display
    Forest cherry = bare_root();
    cherry.add_edge(cherry.add(plain_node()), 0);
    cherry.add_edge(cherry.add(plain_node()), 0);
    double lhs = ibp_integral(cherry, d, 1, q);
    double rhs = series_integral(ibp_step(cherry, first_connection(cherry)), d, 1, q);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));

    // the index-coupled chain display
    Forest coupled = canonicalize([&] {
        Forest f = chain(1);
        f.add_liana(0, 1);
        return f;
    }());
    CHECK(ibp_integral(coupled, d, 1, q) ==
          doctest::Approx(series_integral(ibp_step(coupled, first_connection(coupled)), d, 1, q))
              .epsilon(1e-8));

    // the double laplacian against its fully reduced f-tilde form; the test
    // function needs a nonzero fourth derivative to exercise it
    PolySpec d4 = d;
    d4.phi = Polynomial::parse("x1^4 + x1^3", 1);
    Forest dlap = root_with_self_lianas(2);
    Series ftilde = reduce(Series::term(dlap), Assumption::general);
    double lhs4 = ibp_integral(dlap, d4, 1, q);
    CHECK(std::abs(lhs4) > 1e-3);
    CHECK(lhs4 == doctest::Approx(series_integral(ftilde, d4, 1, q)).epsilon(1e-8));
}

TEST_CASE("integration by parts identity holds on random forests and in 2d") {
    Rng rng(15);
    PolySpec d2;
    d2.dim = 2;
    d2.potential = Polynomial::parse("x1^2/2 + x1^4/4 + x2^2/2 + x2^4/4", 2);
    d2.phi = Polynomial::parse("x1^2 + x1*x2", 2);
    QuadratureSpec q2{2, 5.0, 128};

    Forest cherry = bare_root();
    cherry.add_edge(cherry.add(plain_node()), 0);
    cherry.add_edge(cherry.add(plain_node()), 0);
    CHECK(ibp_integral(cherry, d2, 1, q2) ==
          doctest::Approx(series_integral(ibp_step(cherry, first_connection(cherry)), d2, 1, q2))
              .epsilon(1e-8));

    PolySpec d1 = quartic_well_1d();
    d1.phi = Polynomial::parse("x1^4 + x1^3", 1);
    QuadratureSpec q{1, 6.0, 128};
    for (int t = 0; t < 10; ++t) {
        Forest f = canonicalize(testutil::random_forest(rng, 2, 1));
        auto root = f.root();
        if (f.connection_degree(*root) == 0)
            continue;
        double lhs = ibp_integral(f, d1, 1, q);
        double rhs = series_integral(ibp_step(f, first_connection(f)), d1, 1, q);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("quadrature raises on non-convergence") {
    PolySpec d = quartic_well_1d();
    QuadratureSpec q{1, 1.0, 8}; // eight nodes cannot resolve a sharp density
    CHECK_THROWS_AS(exact_average(d, Rational(1, 100), q), NonConvergence);
}

TEST_CASE("equivariance of the appendix composition") {
    Rng rng(21);
    // Phi_0(f) = f'(Lap f): root <- child with self-liana, drift semantics
    Forest f = chain(1);
    f.add_liana(1, 1);
    for (int t = 0; t < 5; ++t) {
        std::vector<std::vector<Rational>> skew(2, std::vector<Rational>(2, Rational(0)));
        Rational s = testutil::random_rational(rng, 3, 3);
        skew[0][1] = s;
        skew[1][0] = -s;
        auto A = cayley_orthogonal(skew);
        std::vector<Polynomial> field{testutil::random_polynomial(rng, 2, 3),
                                      testutil::random_polynomial(rng, 2, 3)};
        std::vector<Rational> shift = testutil::random_point(rng, 2);
        std::vector<Rational> x = testutil::random_point(rng, 2);
        auto res = equivariance_residual(f, field, A, shift, x);
        for (const auto &r : res)
            CHECK(r == Rational(0));
    }
}

TEST_CASE("equivariance holds for twenty random forests under isometries") {
    Rng rng(33);
    int done = 0;
    while (done < 20) {
        Forest f = testutil::random_forest(rng, 2, 2, 0, done % 4 == 0);
        std::vector<std::vector<Rational>> skew(2, std::vector<Rational>(2, Rational(0)));
        skew[0][1] = testutil::random_rational(rng, 2, 3);
        skew[1][0] = -skew[0][1];
        auto A = cayley_orthogonal(skew);
        std::vector<Polynomial> field{testutil::random_polynomial(rng, 2, 2),
                                      testutil::random_polynomial(rng, 2, 2)};
        std::vector<Rational> shift = testutil::random_point(rng, 2);
        std::vector<Rational> x = testutil::random_point(rng, 2);
        auto res = equivariance_residual(f, field, A, shift, x);
        for (const auto &r : res)
            CHECK(r == Rational(0));
        ++done;
    }
}

TEST_CASE("identity transform always has zero residual") {
    Rng rng(37);
    std::vector<std::vector<Rational>> I{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    Forest f = root_with_self_lianas(1);
    std::vector<Polynomial> field{testutil::random_polynomial(rng, 2, 2),
                                  testutil::random_polynomial(rng, 2, 2)};
    auto res = equivariance_residual(f, field, I, {Rational(0), Rational(0)},
                                     testutil::random_point(rng, 2));
    for (const auto &r : res)
        CHECK(r == Rational(0));
}

TEST_CASE("the laplacian is not equivariant under a non-orthogonal map") {
    // generic quadratic field, A = diag(2, 1)
    std::vector<std::vector<Rational>> A{{Rational(2), Rational(0)},
                                         {Rational(0), Rational(1)}};
    std::vector<Polynomial> field{Polynomial::parse("x1^2 + x2^2", 2),
                                  Polynomial::parse("x1*x2", 2)};
    Forest lap = root_with_self_lianas(1);
    auto res = equivariance_residual(lap, field, A, {Rational(0), Rational(0)},
                                     {Rational(1), Rational(2)});
    bool nonzero = false;
    for (const auto &r : res)
        nonzero |= !r.is_zero();
    CHECK(nonzero);
}

TEST_CASE("cayley transforms are exactly orthogonal") {
    Rng rng(41);
    for (int t = 0; t < 10; ++t) {
        std::vector<std::vector<Rational>> skew(2, std::vector<Rational>(2, Rational(0)));
        skew[0][1] = testutil::random_rational(rng, 5, 4);
        skew[1][0] = -skew[0][1];
        auto A = cayley_orthogonal(skew);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Rational dot = 0;
                for (int k = 0; k < 2; ++k)
                    dot += A[k][i] * A[k][j];
                CHECK(dot == (i == j ? Rational(1) : Rational(0)));
            }
    }
}

TEST_CASE("missing potential raises") {
    PolySpec d;
    d.dim = 1;
    d.f = {Polynomial::parse("x1", 1)};
    d.phi = Polynomial::parse("x1", 1);
    Forest with_square = bare_root();
    int s = with_square.add(square_node());
    with_square.add_liana(0, s);
    CHECK_THROWS_AS(eval_forest(with_square, d, 1, {Rational(0)}), MissingPotential);
}
