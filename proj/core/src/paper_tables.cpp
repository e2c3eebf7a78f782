#include "xbs/paper_tables.hpp"

namespace xbs::paper_tables {

namespace {

// -- weight-tree shorthand -------------------------------------------------------

struct WT {
    NodeKind kind;
    int channel;
    std::vector<WT> kids;
};
WT F(std::vector<WT> k = {}) { return {NodeKind::plain, -1, std::move(k)}; }
WT Fh(std::vector<WT> k = {}) { return {NodeKind::white, -1, std::move(k)}; }
WT X(int ch = 1) { return {NodeKind::grafted, ch, {}}; }

int build_into(Forest &f, const WT &t) {
    int v = f.add({t.kind, t.channel});
    for (const auto &k : t.kids)
        f.add_edge(build_into(f, k), v);
    return v;
}

Coefficient W(const WT &t) {
    Forest f;
    build_into(f, t);
    return weight_symbol(f, WeightSlot::main);
}
Coefficient PW(const WT &t) {
    Forest f;
    build_into(f, t);
    return weight_symbol(f, WeightSlot::postprocessor);
}
Coefficient PD0() {
    return Coefficient::generator(
        Generators::instance().intern("pd0", "d̄_0", "\\overline{d}_0"));
}

Coefficient q(long long n, long long d = 1) { return Coefficient(Rational(n, d)); }
Coefficient s2(int k) { return Coefficient::sigma_power(k); }

// -- exotic basis trees ----------------------------------------------------------

// chains with colours; node 1 is next to the root, the last node on top
Forest tchain(const std::vector<NodeKind> &kinds) { return chain(static_cast<int>(kinds.size()), kinds); }
Forest add_l(Forest f, int a, int b) {
    f.add_liana(a, b);
    return f;
}
Forest tcherry(NodeKind x = NodeKind::plain, NodeKind y = NodeKind::plain) {
    Forest f = bare_root();
    f.add_edge(f.add({x, -1}), 0);
    f.add_edge(f.add({y, -1}), 0);
    return f;
}

const NodeKind P = NodeKind::plain;
const NodeKind Wh = NodeKind::white;

Forest t2101() { return tchain({P}); }
Forest t3101() { return tchain({P, P}); }
Forest t4101() { return tchain({P, P, P}); }
Forest t1111() { return root_with_self_lianas(1); }
Forest t1121() { return root_with_self_lianas(2); }
Forest t1131() { return root_with_self_lianas(3); }
Forest t2111() { return add_l(tchain({P}), 1, 1); } // phi' Lap f
Forest t2112() { return add_l(tchain({P}), 0, 1); }
Forest t2113() { return add_l(tchain({P}), 0, 0); }
Forest t3111() { return add_l(tchain({P, P}), 2, 2); } // phi' f' Lap f
Forest t3112() { return add_l(tchain({P, P}), 1, 2); }
Forest t3113() { return add_l(tchain({P, P}), 1, 1); } // phi'((Lap f)' f)
Forest t3114() { return add_l(tchain({P, P}), 0, 2); }
Forest t3115() { return add_l(tchain({P, P}), 0, 1); }
Forest t3116() { return add_l(tchain({P, P}), 0, 0); }
Forest t3201() { return tcherry(); }
Forest t3211() { return add_l(tcherry(), 1, 1); } // phi''(Lap f, f)
Forest t3212() { return add_l(tcherry(), 1, 2); }
Forest t3213() { return add_l(tcherry(), 0, 1); }
Forest t3214() { return add_l(tcherry(), 0, 0); }
Forest t4201() { // phi' f''(f,f)
    Forest f = bare_root();
    int a = f.add(plain_node());
    f.add_edge(a, 0);
    f.add_edge(f.add(plain_node()), a);
    f.add_edge(f.add(plain_node()), a);
    return f;
}
Forest t4301() { // phi''(f'f, f)
    Forest f = tcherry();
    f.add_edge(f.add(plain_node()), 1);
    return f;
}
Forest t4401() { // phi'''(f,f,f)
    Forest f = tcherry();
    f.add_edge(f.add(plain_node()), 0);
    return f;
}
Forest t2122() { return add_l(add_l(tchain({P}), 0, 1), 0, 1); }
Forest t2124() { return add_l(add_l(tchain({P}), 0, 1), 1, 1); }
Forest t2125() { return add_l(add_l(tchain({P}), 1, 1), 1, 1); } // phi' Lap^2 f
// the three remaining two-node grade-3 liana patterns; the macro codes are
// pinned by matching the derived gamma_2 brackets (see tests)
Forest t2121() { return add_l(add_l(tchain({P}), 1, 1), 0, 0); } // Sum phi'''(Lap f, e, e)
Forest t2126() { return add_l(add_l(tchain({P}), 0, 1), 0, 0); }
Forest t2127() { return add_l(add_l(tchain({P}), 0, 0), 0, 0); }

Coefficient a_(const Forest &f) { return generic_symbol(f, false); }
Coefficient abar_(const Forest &f) { return generic_symbol(f, true); }

Equation row(const Forest &prov, Coefficient lhs, int order, const std::string &label) {
    return Equation{std::move(lhs), canonicalize(prov), order, label};
}

// -- tables ------------------------------------------------------------------------

ConditionSet rk_im() {
    ConditionSet t;
    t.assumption = Assumption::gradient_f;
    t.order = 3;
    t.equations = {
        row(t2101(), W(F()) - q(1), 1, "consistency"),
        row(t3101(), W(F({F()})) - q(2) * W(F({X()})) + q(1, 2), 2, "order 2"),
        row(t2111(), W(F({X(), X()})) - q(2) * W(F({X()})) + q(1, 2), 2, "order 2"),
        row(t4101(),
            W(F({F({F()})})) - q(2) * W(F({F({X()})})) + W(F({F()})) -
                W(F({X()})) * W(F({X()})),
            3, "order 3"),
        row(t3111(),
            W(F({F({X(), X()})})) - q(2) * W(F({F({X()})})) + W(F({F()})) -
                W(F({X()})) * W(F({X()})),
            3, "order 3"),
        row(t4201(),
            q(1, 2) * W(F({F(), F()})) - q(2) * W(F({X(), F()})) - q(2) * W(F({X()})) +
                q(2) * W(F({X(), X()})) + W(F({F()})) + q(1, 3),
            3, "order 3"),
        row(t3112(),
            W(F({X(), F({X()})})) - W(F({F(), X()})) - W(F({X()})) + W(F({X(), X()})) +
                W(F({F()})) - W(F({F({X()})})) -
                q(1, 2) * W(F({X()})) * W(F({X()})) + q(1, 6),
            3, "order 3"),
        row(t3113(),
            q(1, 2) * W(F({F(), X(), X()})) - W(F({X(), X(), X()})) - q(2) * W(F({X()})) +
                q(5, 2) * W(F({X(), X()})) - W(F({F(), X()})) + q(1, 2) * W(F({F()})) +
                q(1, 3),
            3, "order 3"),
        row(t2125(),
            q(1, 8) * W(F({X(), X(), X(), X()})) - q(1, 2) * W(F({X(), X(), X()})) -
                q(1, 2) * W(F({X()})) + q(3, 4) * W(F({X(), X()})) + q(1, 12),
            3, "order 3"),
    };
    return t;
}

ConditionSet rk_weak_l2() {
    ConditionSet t;
    t.assumption = Assumption::general;
    t.order = 3;
    t.weak = true;
    auto b = [](std::vector<WT> k) { return W(F(std::move(k))); };
    t.equations = {
        row(t2101(), b({}) - q(1), 1, "consistency"),
        row(t3101(), b({F()}) - q(1, 2), 2, "order 2"),
        row(t2111(), b({X(1), X(1)}) + b({X(2), X(2)}) - q(1, 2), 2, "order 2"),
        row(t2112(), b({X(1)}) - q(1, 2), 2, "order 2"),
        row(t4101(), b({F({F()})}) - q(1, 6), 3, "order 3"),
        row(t3111(), b({F({X(1), X(1)})}) + b({F({X(2), X(2)})}) - q(1, 6), 3, "order 3"),
        row(t4201(), b({F(), F()}) - q(1, 3), 3, "order 3"),
        row(t3112(), b({X(1), F({X(1)})}) + b({X(2), F({X(2)})}) - q(1, 6), 3, "order 3"),
        row(t3113(), b({F(), X(1), X(1)}) + b({F(), X(2), X(2)}) - q(1, 3), 3, "order 3"),
        row(t2125(),
            b({X(1), X(1), X(1), X(1)}) + q(2) * b({X(1), X(1), X(2), X(2)}) +
                b({X(2), X(2), X(2), X(2)}) - q(1, 3),
            3, "order 3"),
        row(t3114(), b({F({X(1)})}) - q(1, 6), 3, "order 3"),
        row(t3212(), b({X(2)}) * b({X(2)}) - q(1, 12), 3, "order 3"),
        row(t3115(), b({F(), X(1)}) - q(1, 3), 3, "order 3"),
        row(t2124(), b({X(1), X(1), X(1)}) + b({X(1), X(2), X(2)}) - q(1, 3), 3, "order 3"),
        row(t2122(), b({X(1), X(1)}) - q(1, 3), 3, "order 3"),
    };
    return t;
}

ConditionSet rk_postprocessed() {
    ConditionSet t;
    t.assumption = Assumption::gradient_f;
    t.order = 3;
    Coefficient d0 = PD0();
    Coefficient d02 = d0 * d0;
    Coefficient d04 = d02 * d02;
    t.equations = {
        row(t2101(), W(F()) - q(1), 1, "consistency"),
        row(t1111(), PW(F()) - d02, 3, "postprocessor-shape"),
        row(t3101(),
            W(F({F()})) - q(2) * W(F({X()})) - q(2) * PW(F()) + q(2) * d02 + q(1, 2), 2,
            "order 2"),
        row(t2111(),
            W(F({X(), X()})) - q(2) * W(F({X()})) - PW(F()) + d02 + q(1, 2), 2, "order 2"),
        row(t4101(),
            W(F({F({F()})})) - q(2) * W(F({F({X()})})) + W(F({F()})) -
                W(F({X()})) * W(F({X()})) - q(2) * PW(F({F()})) +
                q(4) * d0 * PW(F({X()})) - d04,
            3, "order 3"),
        row(t3111(),
            W(F({F({X(), X()})})) - q(2) * W(F({F({X()})})) + W(F({F()})) -
                W(F({X()})) * W(F({X()})) - PW(F({F()})) - PW(F({X(), X()})) +
                q(4) * d0 * PW(F({X()})) - d04,
            3, "order 3"),
        row(t4201(),
            q(1, 2) * W(F({F(), F()})) - q(2) * W(F({X(), F()})) - q(2) * W(F({X()})) +
                q(2) * W(F({X(), X()})) + W(F({F()})) - PW(F({F()})) +
                q(2) * d0 * PW(F({X()})) - q(1, 2) * d04 + q(1, 3),
            3, "order 3"),
        row(t3112(),
            W(F({X(), F({X()})})) - W(F({F(), X()})) - W(F({X()})) + W(F({X(), X()})) +
                W(F({F()})) - W(F({F({X()})})) - q(1, 2) * W(F({X()})) * W(F({X()})) -
                PW(F({F()})) + q(2) * d0 * PW(F({X()})) - q(1, 2) * d04 + q(1, 6),
            3, "order 3"),
        row(t3113(),
            q(1, 2) * W(F({F(), X(), X()})) - W(F({X(), X(), X()})) - q(2) * W(F({X()})) +
                q(5, 2) * W(F({X(), X()})) - W(F({F(), X()})) + q(1, 2) * W(F({F()})) -
                q(1, 2) * PW(F({F()})) - q(1, 2) * PW(F({X(), X()})) +
                q(2) * d0 * PW(F({X()})) - q(1, 2) * d04 + q(1, 3),
            3, "order 3"),
        row(t2125(),
            q(1, 8) * W(F({X(), X(), X(), X()})) - q(1, 2) * W(F({X(), X(), X()})) -
                q(1, 2) * W(F({X()})) + q(3, 4) * W(F({X(), X()})) -
                q(1, 4) * PW(F({X(), X()})) + q(1, 2) * d0 * PW(F({X()})) -
                q(1, 8) * d04 + q(1, 12),
            3, "order 3"),
    };
    return t;
}

ConditionSet partitioned() {
    ConditionSet t;
    t.assumption = Assumption::partitioned_gradients;
    t.order = 2;
    Coefficient d0 = PD0();
    Coefficient d02 = d0 * d0;
    t.equations = {
        row(t2101(), W(F()) - q(1), 1, "consistency"),
        row(tchain({Wh}), W(Fh()) - q(1), 1, "consistency"),
        row(t3101(),
            W(F({F()})) - q(2) * W(F({X()})) - q(2) * PW(F()) + q(2) * d02 + q(1, 2), 2,
            "order 2"),
        row(tchain({P, Wh}), // phi' f1' f2: the white node feeds the plain one
            W(F({Fh()})) - q(2) * W(F({X()})) - PW(F()) - PW(Fh()) + q(2) * d02 + q(1, 2),
            2, "order 2"),
        row(tchain({Wh, P}),
            W(Fh({F()})) - q(2) * W(Fh({X()})) - PW(F()) - PW(Fh()) + q(2) * d02 + q(1, 2),
            2, "order 2"),
        row(tchain({Wh, Wh}),
            W(Fh({Fh()})) - q(2) * W(Fh({X()})) - q(2) * PW(Fh()) + q(2) * d02 + q(1, 2),
            2, "order 2"),
        row(t2111(),
            W(F({X(), X()})) - q(2) * W(F({X()})) - PW(F()) + d02 + q(1, 2), 2, "order 2"),
        row(add_l(tchain({Wh}), 1, 1),
            W(Fh({X(), X()})) - q(2) * W(Fh({X()})) - PW(Fh()) + d02 + q(1, 2), 2,
            "order 2"),
    };
    return t;
}

ConditionSet non_reversible() {
    ConditionSet t;
    t.assumption = Assumption::non_reversible;
    t.order = 2;
    Coefficient d0 = PD0();
    Coefficient d02 = d0 * d0;
    t.equations = {
        row(t2101(), W(F()) - q(1), 1, "consistency"),
        row(t3101(),
            W(F({F()})) - q(2) * W(F({X()})) - q(2) * PW(F()) + q(2) * d02 + q(1, 2), 2,
            "order 2"),
        row(tchain({P, Wh}), W(F({Fh()})) + PW(F()) - PW(Fh()), 2, "order 2"),
        row(tchain({Wh, P}),
            W(Fh({F()})) - q(2) * W(Fh({X()})) + W(Fh()) - PW(F()) - PW(Fh()) + q(2) * d02,
            2, "order 2"),
        row(tchain({Wh, Wh}), W(Fh({Fh()})) - q(1, 2) * W(Fh()) * W(Fh()), 2, "order 2"),
        row(t2111(),
            W(F({X(), X()})) - q(2) * W(F({X()})) - PW(F()) + d02 + q(1, 2), 2, "order 2"),
        row(add_l(tchain({Wh}), 1, 1),
            W(Fh({X(), X()})) - q(2) * W(Fh({X()})) + W(Fh()) - PW(Fh()) + d02, 2,
            "order 2"),
    };
    return t;
}

ConditionSet postprocessed_general_2() {
    ConditionSet t;
    t.assumption = Assumption::gradient_f;
    t.order = 2;
    t.equations = {
        row(t3101(),
            a_(t3101()) - q(2) * s2(-2) * a_(t2112()) + q(2) * s2(-2) * a_(t2113()) -
                q(4) * s2(-4) * a_(t1121()) - q(2) * abar_(t2101()) +
                q(4) * s2(-2) * abar_(t1111()),
            2, "order 2"),
        row(t2111(),
            a_(t2111()) - a_(t2112()) + a_(t2113()) - q(2) * s2(-2) * a_(t1121()) -
                q(1, 2) * s2(2) * abar_(t2101()) + abar_(t1111()),
            2, "order 2"),
        row(t3201(),
            a_(t3201()) - q(2) * s2(-2) * a_(t2113()) + q(4) * s2(-4) * a_(t1121()), 2,
            "order 2"),
    };
    return t;
}

ConditionSet postprocessed_general_3() {
    ConditionSet t;
    t.assumption = Assumption::gradient_f;
    t.order = 3;
    t.equations = {
        row(t4101(),
            a_(t4101()) - q(2) * s2(-2) * a_(t3114()) - q(2) * s2(-2) * a_(t3212()) +
                q(2) * s2(-2) * a_(t3116()) + q(2) * s2(-2) * a_(t3213()) -
                q(4) * s2(-2) * a_(t3214()) - q(4) * s2(-4) * a_(t2126()) +
                q(12) * s2(-4) * a_(t2127()) - q(24) * s2(-6) * a_(t1131()) -
                q(2) * abar_(t3101()) + q(4) * s2(-2) * abar_(t2112()) +
                q(2) * abar_(t3201()) - q(8) * s2(-2) * abar_(t2113()) +
                q(16) * s2(-4) * abar_(t1121()),
            3, "order 3"),
        row(t3111(),
            a_(t3111()) - a_(t3114()) - a_(t3212()) + a_(t3116()) + a_(t3213()) -
                q(2) * a_(t3214()) - q(2) * s2(-2) * a_(t2126()) +
                q(6) * s2(-2) * a_(t2127()) - q(12) * s2(-4) * a_(t1131()) -
                q(1, 2) * s2(2) * abar_(t3101()) - abar_(t2111()) + q(2) * abar_(t2112()) +
                s2(2) * abar_(t3201()) - q(4) * abar_(t2113()) +
                q(8) * s2(-2) * abar_(t1121()),
            3, "order 3"),
        row(t4201(),
            a_(t4201()) - q(2) * s2(-2) * a_(t3115()) + q(4) * s2(-4) * a_(t2122()) +
                q(2) * s2(-2) * a_(t3116()) - q(4) * s2(-4) * a_(t2126()) +
                q(4) * s2(-4) * a_(t2127()) - q(8) * s2(-6) * a_(t1131()) -
                abar_(t3101()) - abar_(t3201()) + q(2) * s2(-2) * abar_(t2112()),
            3, "order 3"),
        row(t3112(),
            a_(t3112()) - a_(t3115()) - a_(t3212()) - a_(t3114()) + q(2) * a_(t3116()) +
                q(2) * s2(-2) * a_(t2122()) + a_(t3213()) - q(2) * a_(t3214()) -
                q(4) * s2(-2) * a_(t2126()) + q(8) * s2(-2) * a_(t2127()) -
                q(16) * s2(-4) * a_(t1131()) - s2(2) * abar_(t3101()) +
                s2(2) * abar_(t3201()) + q(2) * abar_(t2112()) - q(4) * abar_(t2113()) +
                q(8) * s2(-2) * abar_(t1121()),
            3, "order 3"),
        row(t3113(),
            a_(t3113()) - q(2) * s2(-2) * a_(t2124()) - a_(t3115()) +
                q(2) * s2(-2) * a_(t2121()) + a_(t3116()) + q(4) * s2(-2) * a_(t2122()) -
                q(4) * s2(-2) * a_(t2126()) + q(4) * s2(-2) * a_(t2127()) -
                q(8) * s2(-4) * a_(t1131()) - q(1, 2) * s2(2) * abar_(t3101()) -
                abar_(t2111()) + q(2) * abar_(t2112()) - q(2) * abar_(t2113()) +
                q(4) * s2(-2) * abar_(t1121()),
            3, "order 3"),
        row(t2125(),
            a_(t2125()) - a_(t2124()) + a_(t2121()) + a_(t2122()) - a_(t2126()) +
                a_(t2127()) - q(2) * s2(-2) * a_(t1131()) -
                q(1, 2) * s2(2) * abar_(t2111()) + q(1, 2) * s2(2) * abar_(t2112()) -
                q(1, 2) * s2(2) * abar_(t2113()) + abar_(t1121()),
            3, "order 3"),
        row(t4401(),
            a_(t4401()) - q(2) * s2(-2) * a_(t3214()) + q(4) * s2(-4) * a_(t2127()) -
                q(8) * s2(-6) * a_(t1131()),
            3, "order 3"),
        row(t3211(),
            a_(t3211()) - a_(t3213()) + q(2) * a_(t3214()) - q(2) * s2(-2) * a_(t2121()) +
                q(2) * s2(-2) * a_(t2126()) - q(6) * s2(-2) * a_(t2127()) +
                q(12) * s2(-4) * a_(t1131()) - s2(2) * abar_(t3201()) +
                q(2) * abar_(t2113()) - q(4) * s2(-2) * abar_(t1121()),
            3, "order 3"),
        row(t4301(),
            a_(t4301()) - q(2) * s2(-2) * a_(t3213()) - q(2) * s2(-2) * a_(t3116()) +
                q(4) * s2(-4) * a_(t2126()) + q(4) * s2(-2) * a_(t3214()) -
                q(12) * s2(-4) * a_(t2127()) + q(24) * s2(-6) * a_(t1131()) -
                q(4) * abar_(t3201()) + q(8) * s2(-2) * abar_(t2113()) -
                q(16) * s2(-4) * abar_(t1121()),
            3, "order 3"),
    };
    return t;
}

} // namespace

Series gamma_transcription(int k) {
    Series s(Series::unbounded);
    if (k == 0) {
        s.add(t2101(), a_(t2101()) - q(2) * s2(-2) * a_(t1111()));
        return s;
    }
    if (k == 1) {
        s.add(t3101(), a_(t3101()) - q(2) * s2(-2) * a_(t2112()) + q(2) * s2(-2) * a_(t2113()) -
                           q(4) * s2(-4) * a_(t1121()));
        s.add(t2111(), a_(t2111()) - a_(t2112()) + a_(t2113()) - q(2) * s2(-2) * a_(t1121()));
        s.add(t3201(), a_(t3201()) - q(2) * s2(-2) * a_(t2113()) + q(4) * s2(-4) * a_(t1121()));
        return s;
    }
    if (k == 2) {
        // appendix display: the order-3 general table with the postprocessor
        // coefficients set to zero
        ConditionSet full = postprocessed_general_3();
        std::map<int, Coefficient> kill;
        for (const auto &eq : full.equations)
            for (const auto &[m, n] : eq.lhs.terms())
                for (const auto &[id, e] : m)
                    if (Generators::instance().name(id).rfind("abar(", 0) == 0)
                        kill[id] = Coefficient(0);
        for (const auto &eq : full.equations)
            s.add(eq.provenance, eq.lhs.substitute(kill));
        return s;
    }
    throw Error("gamma_transcription: k in 0..2");
}

std::vector<Equation> non_reversible_j_rows() {
    Coefficient d02 = PD0() * PD0();
    return {
        row(tchain({P, Wh}),
            q(2) * W(Fh({X()})) - W(Fh()) + W(F({Fh()})) - W(Fh({X(), X()})) + PW(F()) - d02,
            2, "order 2 (J)"),
        row(tchain({Wh, P}),
            W(Fh({F()})) - W(Fh({X(), X()})) - PW(F()) + d02, 2, "order 2 (J)"),
    };
}

ConditionSet transcription(TableId id) {
    switch (id) {
    case TableId::RK_IM:
        return rk_im();
    case TableId::RK_WEAK_L2:
        return rk_weak_l2();
    case TableId::RK_POSTPROCESSED:
        return rk_postprocessed();
    case TableId::PARTITIONED:
        return partitioned();
    case TableId::NONREVERSIBLE:
        return non_reversible();
    case TableId::POSTPROCESSED_GENERAL_2:
        return postprocessed_general_2();
    case TableId::POSTPROCESSED_GENERAL_3:
        return postprocessed_general_3();
    default:
        throw Error("no transcription for table " + to_string(id));
    }
}

std::uint64_t fingerprint() {
    std::string dump;
    for (TableId id : {TableId::RK_IM, TableId::RK_WEAK_L2, TableId::RK_POSTPROCESSED,
                       TableId::PARTITIONED, TableId::NONREVERSIBLE,
                       TableId::POSTPROCESSED_GENERAL_2, TableId::POSTPROCESSED_GENERAL_3}) {
        dump += to_string(id) + "\n";
        for (const auto &e : transcription(id).equations)
            dump += e.lhs.str() + " | " + detail::render_ascii(e.provenance) + "\n";
    }
    for (int k = 0; k <= 2; ++k)
        dump += "gamma" + std::to_string(k) + ": " + gamma_transcription(k).str() + "\n";
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace xbs::paper_tables
