// Acceptance suite: one pass/fail line per criterion, exit code = failures.
//
// 1  pair-partition counts and the four-cross expectation
// 2  theta-method and symbolic A_1 coefficients
// 3  L^2 display
// 4  gamma-tilde displays (orders 1..3) against the transcriptions
// 5  table equivalence on random tableaux; one-noise weak order-3 clash
// 6  scheme classification (Euler-Maruyama, postprocessed, partitioned,
//    non-reversible)
// 7  expectation and composition against the independent oracles
// 8  integration-by-parts quadrature identities
// 9  isometric equivariance residuals
// 10 Monte Carlo order study (Euler-Maruyama slope 1, postprocessed >= 1.7)
// 11 Euler-Maruyama/OU second moment against the AR(1) law

#include <chrono>
#include <cmath>
#include <iostream>

#include "xbs/calculus.hpp"
#include "xbs/conditions.hpp"
#include "xbs/paper_tables.hpp"
#include "xbs/sampler.hpp"

using namespace xbs;

namespace {

int failures = 0;

void report(int n, const std::string &what, bool ok, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", n, what.c_str(),
                seconds);
    if (!ok)
        ++failures;
}

template <typename F> void criterion(int n, const std::string &what, F &&f) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = f();
    } catch (const std::exception &e) {
        std::printf("      exception: %s\n", e.what());
        ok = false;
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(n, what, ok, dt);
}

Coefficient q(long long n, long long d = 1) { return Coefficient(Rational(n, d)); }

struct Rng {
    std::uint64_t s = 88172645463325252ull;
    std::uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
    Rational rat(int num_range = 2, int den_range = 3) {
        return Rational(below(2 * num_range + 1) - num_range, 1 + below(den_range));
    }
};

Polynomial random_poly(Rng &rng, int dim, int degree) {
    Polynomial p(dim);
    for (int t = 0; t < 6; ++t) {
        Polynomial mono(dim, rng.rat(3, 3));
        int deg = rng.below(degree + 1);
        for (int k = 0; k < deg; ++k)
            mono = mono * Polynomial::variable(dim, rng.below(dim));
        p += mono;
    }
    return p;
}

Scheme random_rk(Rng &rng, int channels, bool consistent) {
    Tableau t;
    t.s = 1 + rng.below(3);
    t.A.assign(t.s, std::vector<Coefficient>(t.s, Coefficient(0)));
    for (int i = 0; i < t.s; ++i)
        for (int j = 0; j < t.s; ++j)
            if (rng.below(2))
                t.A[i][j] = Coefficient(rng.rat());
    t.b.assign(t.s, Coefficient(0));
    Rational sum = 0;
    for (int i = 0; i + 1 < t.s; ++i) {
        t.b[i] = Coefficient(rng.rat());
        sum += t.b[i].constant_value().rational();
    }
    t.b[t.s - 1] = consistent ? Coefficient(Rational(1) - sum) : Coefficient(rng.rat());
    t.d.assign(t.s, std::vector<Coefficient>(channels, Coefficient(0)));
    for (int i = 0; i < t.s; ++i)
        for (int k = 0; k < channels; ++k)
            t.d[i][k] = Coefficient(rng.rat(2, 2));
    t.update_noise.assign(channels, Coefficient(0));
    t.update_noise[0] = Coefficient(1);
    Scheme s;
    s.main.tableau = t;
    return s;
}

bool satisfies(const ConditionSet &cs, const std::map<int, Coefficient> &vals) {
    for (const auto &e : cs.equations) {
        Coefficient v = e.lhs.substitute(vals);
        if (!v.is_constant() || !v.constant_value().is_zero())
            return false;
    }
    return true;
}

Forest cherry() {
    Forest f = bare_root();
    f.add_edge(f.add(plain_node()), 0);
    f.add_edge(f.add(plain_node()), 0);
    return f;
}

} // namespace

int main() {
    criterion(1, "pair partitions and the four-cross expectation", [] {
        bool ok = pair_partitions(2).size() == 1 && pair_partitions(4).size() == 3 &&
                  pair_partitions(6).size() == 15 && pair_partitions(8).size() == 105;
        Series e = expectation(Series::term(root_with_crosses(4)));
        ok &= e.size() == 1 &&
              e.coefficient_of(root_with_self_lianas(2)) == Coefficient(3);
        return ok;
    });

    criterion(2, "theta-method and symbolic A_1 displays", [] {
        Coefficient theta = Coefficient::generator("theta");
        auto ops = operator_expansion(theta_method(theta), 1);
        Forest lapf = chain(1);
        lapf.add_liana(1, 1);
        Forest mixed = chain(1);
        mixed.add_liana(0, 1);
        Forest rootlap = chain(1);
        rootlap.add_liana(0, 0);
        const Series &A1 = ops[1];
        bool ok = A1.size() == 6;
        ok &= A1.coefficient_of(chain(2)) == theta;
        ok &= A1.coefficient_of(cherry()) == q(1, 2);
        ok &= A1.coefficient_of(lapf) == q(1, 2) * sigma2() * theta;
        ok &= A1.coefficient_of(mixed) == sigma2() * theta;
        ok &= A1.coefficient_of(rootlap) == q(1, 2) * sigma2();
        ok &= A1.coefficient_of(root_with_self_lianas(2)) == q(1, 8) * sigma2() * sigma2();
        ok &= ops[0] == generator().truncated(2);

        // generic weights: gamma_1 of the Runge-Kutta family
        SymbolicClass rk;
        Series S1 = expectation(expand_grafted_symbolic(rk, 4).graded_part(4));
        Forest bare;
        bare.add(plain_node());
        Coefficient b = weight_symbol(bare, WeightSlot::main);
        std::map<int, Coefficient> one{{b.terms().begin()->first[0].first, Coefficient(1)}};
        Forest fx;
        {
            int a = fx.add(plain_node());
            int g = fx.add(grafted_node(1));
            fx.add_edge(g, a);
        }
        Forest fc;
        {
            int a = fc.add(plain_node());
            int g = fc.add(plain_node());
            fc.add_edge(g, a);
        }
        Forest fxx = fx;
        {
            int g = fxx.add(grafted_node(1));
            fxx.add_edge(g, 0);
        }
        ok &= S1.coefficient_of(chain(2)) == weight_symbol(fc, WeightSlot::main);
        ok &= S1.coefficient_of(mixed) == sigma2() * weight_symbol(fx, WeightSlot::main);
        ok &= S1.coefficient_of(lapf).substitute(one) ==
              q(1, 2) * sigma2() * weight_symbol(fxx, WeightSlot::main);
        ok &= S1.coefficient_of(cherry()).substitute(one) == q(1, 2);
        ok &= S1.coefficient_of(rootlap).substitute(one) == q(1, 2) * sigma2();
        ok &= S1.coefficient_of(root_with_self_lianas(2)) == q(1, 8) * sigma2() * sigma2();
        return ok;
    });

    criterion(3, "L^2 matches the six-term display", [] {
        Series L2 = generator_power(2, 8);
        Forest lapf = chain(1);
        lapf.add_liana(1, 1);
        Forest mixed = chain(1);
        mixed.add_liana(0, 1);
        Forest rootlap = chain(1);
        rootlap.add_liana(0, 0);
        return L2.size() == 6 && L2.coefficient_of(chain(2)) == Coefficient(1) &&
               L2.coefficient_of(cherry()) == Coefficient(1) &&
               L2.coefficient_of(rootlap) == sigma2() &&
               L2.coefficient_of(lapf) == q(1, 2) * sigma2() &&
               L2.coefficient_of(mixed) == sigma2() &&
               L2.coefficient_of(root_with_self_lianas(2)) == q(1, 4) * sigma2() * sigma2();
    });

    criterion(4, "gamma-tilde displays, orders one to three", [] {
        bool ok = *reproduce_table(TableId::GAMMA0).series == paper_tables::gamma_transcription(0);
        ok &= *reproduce_table(TableId::GAMMA1).series == paper_tables::gamma_transcription(1);
        ok &= *reproduce_table(TableId::GAMMA2).series == paper_tables::gamma_transcription(2);
        return ok;
    });

    criterion(5, "table equivalence on 100 random tableaux; one-noise clash", [] {
        Rng rng;
        auto im_d = invariant_measure_conditions({SchemeClassKind::rk, 1}, 3,
                                                 Assumption::gradient_f);
        auto im_p = paper_tables::transcription(TableId::RK_IM);
        auto wk_d = weak_order_conditions({SchemeClassKind::rk, 2}, 3, Assumption::general);
        auto wk_p = paper_tables::transcription(TableId::RK_WEAK_L2);
        bool ok = true;
        for (int t = 0; t < 100 && ok; ++t) {
            Scheme s = random_rk(rng, 2, t % 2 == 0);
            auto vals = numeric_weight_map(s, 8);
            ok &= satisfies(im_d, vals) == satisfies(im_p, vals);
            ok &= satisfies(wk_d, vals) == satisfies(wk_p, vals);
        }
        ok &= weak_order_conditions({SchemeClassKind::rk, 1}, 3, Assumption::general).inconsistent;
        return ok;
    });

    criterion(6, "scheme classification", [] {
        bool ok =
            check_tableau(euler_maruyama(), Assumption::gradient_f, 3).invariant_measure_order ==
            1;
        ok &= check_tableau(postprocessed_implicit_example(), Assumption::gradient_f, 2)
                  .invariant_measure_order == 2;
        ok &= check_tableau(partitioned_example(), Assumption::partitioned_gradients, 2)
                  .invariant_measure_order == 2;
        ok &= check_tableau(non_reversible_example(), Assumption::non_reversible_j, 2)
                  .invariant_measure_order == 2;
        return ok;
    });

    criterion(7, "expectation and composition against the oracles", [] {
        Rng rng;
        PolySpec data;
        data.dim = 2;
        data.f = {random_poly(rng, 2, 2), random_poly(rng, 2, 2)};
        data.phi = random_poly(rng, 2, 3);
        std::vector<Rational> x{rng.rat(2, 3), rng.rat(2, 3)};
        bool ok = true;

        auto grafted = enumerate_forests(6, {NodeKind::root, NodeKind::plain, NodeKind::grafted},
                                         {.lianas = true}, 2);
        int with_crosses = 0;
        for (const auto &f : grafted) {
            bool has = false;
            for (const auto &nd : f.nodes)
                has |= nd.kind == NodeKind::grafted;
            if (!has)
                continue;
            ++with_crosses;
            Rational paired = 0;
            Series px = expectation(Series::term(f));
            for (const auto &[g, c] : px.terms())
                paired += c.constant_value().rational() * eval_forest(g, data, 1, x);
            ok &= paired == gaussian_expectation_oracle(f, data, 1, x);
        }
        ok &= with_crosses > 50;

        auto pool = enumerate_forests(4, {NodeKind::root, NodeKind::plain},
                                      {.lianas = true, .aromas = true});
        int pairs = 0;
        for (const auto &outer : pool)
            for (const auto &inner : pool) {
                PolySpec shifted = data;
                shifted.phi = differential_polynomial(inner, data, 1);
                Rational direct = eval_forest(outer, shifted, 1, x);
                Rational via =
                    eval_series(compose(Series::term(outer), Series::term(inner)), data, 1, x);
                ok &= via == direct;
                ++pairs;
            }
        ok &= pairs >= 81;
        return ok;
    });

    criterion(8, "integration-by-parts quadrature identities", [] {
        PolySpec d1;
        d1.dim = 1;
        d1.potential = Polynomial::parse("x1^2/2 + x1^4/4", 1);
        d1.phi = Polynomial::parse("x1^2 + x1^3", 1);
        QuadratureSpec q1{1, 6.0, 128};
        bool ok = true;

        Forest ch = cherry();
        ok &= std::abs(ibp_integral(ch, d1, 1, q1) -
                       series_integral(ibp_step(ch, first_connection(ch)), d1, 1, q1)) < 1e-8;

        Forest coupled = canonicalize([] {
            Forest f = chain(1);
            f.add_liana(0, 1);
            return f;
        }());
        ok &= std::abs(ibp_integral(coupled, d1, 1, q1) -
                       series_integral(ibp_step(coupled, first_connection(coupled)), d1, 1, q1)) <
              1e-8;

        PolySpec d4 = d1;
        d4.phi = Polynomial::parse("x1^4 + x1^3", 1);
        Forest dlap = root_with_self_lianas(2);
        Series ftilde = reduce(Series::term(dlap), Assumption::general);
        double lhs = ibp_integral(dlap, d4, 1, q1);
        ok &= std::abs(lhs) > 1e-3;
        ok &= std::abs(lhs - series_integral(ftilde, d4, 1, q1)) < 1e-8;

        PolySpec d2;
        d2.dim = 2;
        d2.potential = Polynomial::parse("x1^2/2 + x1^4/4 + x2^2/2 + x2^4/4", 2);
        d2.phi = Polynomial::parse("x1^2 + x1*x2", 2);
        QuadratureSpec q2{2, 5.0, 128};
        ok &= std::abs(ibp_integral(ch, d2, 1, q2) -
                       series_integral(ibp_step(ch, first_connection(ch)), d2, 1, q2)) < 1e-8;
        return ok;
    });

    criterion(9, "isometric equivariance residuals", [] {
        Rng rng;
        bool ok = true;
        // the appendix composition f'(Lap f)
        Forest appendix = chain(1);
        appendix.add_liana(1, 1);
        int done = 0;
        while (done < 20) {
            Forest f = done == 0 ? appendix : [&] {
                Forest g = bare_root();
                int nd = 1 + rng.below(2);
                std::vector<int> nodes{0};
                for (int i = 0; i < nd; ++i) {
                    int v = g.add(plain_node());
                    g.add_edge(v, nodes[rng.below(static_cast<int>(nodes.size()))]);
                    nodes.push_back(v);
                }
                for (int i = 0; i < rng.below(3); ++i)
                    g.add_liana(nodes[rng.below(static_cast<int>(nodes.size()))],
                                nodes[rng.below(static_cast<int>(nodes.size()))]);
                return g;
            }();
            std::vector<std::vector<Rational>> skew(2, std::vector<Rational>(2, Rational(0)));
            skew[0][1] = rng.rat(3, 3);
            skew[1][0] = -skew[0][1];
            auto A = cayley_orthogonal(skew);
            std::vector<Polynomial> field{random_poly(rng, 2, 2), random_poly(rng, 2, 2)};
            std::vector<Rational> shift{rng.rat(2, 2), rng.rat(2, 2)};
            std::vector<Rational> x{rng.rat(2, 2), rng.rat(2, 2)};
            for (const auto &r : equivariance_residual(f, field, A, shift, x))
                ok &= r.is_zero();
            ++done;
        }
        // non-orthogonal map detected through the laplacian
        std::vector<std::vector<Rational>> M{{Rational(2), Rational(0)},
                                             {Rational(0), Rational(1)}};
        std::vector<Polynomial> quad{Polynomial::parse("x1^2 + x2^2", 2),
                                     Polynomial::parse("x1*x2", 2)};
        bool nonzero = false;
        for (const auto &r : equivariance_residual(root_with_self_lianas(1), quad, M,
                                                   {Rational(0), Rational(0)},
                                                   {Rational(1), Rational(2)}))
            nonzero |= !r.is_zero();
        ok &= nonzero;
        return ok;
    });

    criterion(10, "Monte Carlo order study (double well)", [] {
        PolySpec dw;
        dw.dim = 1;
        dw.potential = Polynomial::parse("x1^4/4 - x1^2/2", 1);
        dw.phi = Polynomial::parse("x1^2", 1);
        QuadratureSpec q{1, 6.0, 128};

        MCSpec em;
        em.scheme = euler_maruyama();
        em.data = dw;
        em.sigma2 = 1;
        em.step_sizes = {0.05, 0.1, 0.2};
        em.steps = 1250000; // 1e7 total over 8 chains
        em.chains = 8;
        em.seed = 424242;
        em.start = {1.0};
        SlopeReport em_rep = order_study(em, q);
        bool ok = std::abs(em_rep.slope - 1.0) <= 0.3;
        std::printf("      euler-maruyama slope %.3f +- %.3f\n", em_rep.slope,
                    em_rep.slope_stderr);

        MCSpec pp = em;
        pp.scheme = postprocessed_implicit_example();
        pp.step_sizes = {0.1, 0.2, 0.4};
        pp.seed = 515151;
        SlopeReport pp_rep = order_study(pp, q);
        std::printf("      postprocessed slope %.3f +- %.3f\n", pp_rep.slope,
                    pp_rep.slope_stderr);
        ok &= pp_rep.slope >= 1.7;
        return ok;
    });

    criterion(11, "OU second moment against the AR(1) law", [] {
        PolySpec ou;
        ou.dim = 1;
        ou.potential = Polynomial::parse("x1^2/2", 1);
        ou.phi = Polynomial::parse("x1^2", 1);
        MCSpec m;
        m.scheme = euler_maruyama();
        m.data = ou;
        m.sigma2 = 2;
        m.step_sizes = {0.05, 0.1, 0.2};
        m.steps = 200000;
        m.chains = 8;
        m.seed = 777;
        bool ok = true;
        for (const auto &e : simulate(m)) {
            double rho = 1.0 - e.h;
            double exact = e.h * 2.0 / (1.0 - rho * rho);
            ok &= std::abs(e.mean - exact) <= 3.0 * e.stderr_mean;
            std::printf("      h=%.2f mean %.5f exact %.5f stderr %.5f\n", e.h, e.mean, exact,
                        e.stderr_mean);
        }
        return ok;
    });

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
