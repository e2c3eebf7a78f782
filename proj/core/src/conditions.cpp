#include "xbs/conditions.hpp"

#include "xbs/calculus.hpp"
#include "xbs/paper_tables.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <sstream>

namespace xbs {

std::string Equation::pretty(bool latex) const {
    return lhs.pretty(latex) + " = 0";
}

std::vector<const Equation *> ConditionSet::at_order(int ord) const {
    std::vector<const Equation *> out;
    for (const auto &e : equations)
        if (e.order == ord)
            out.push_back(&e);
    return out;
}

std::optional<Equation> make_equation(Coefficient lhs, const Forest &prov, int order,
                                      std::string label) {
    if (lhs.is_zero())
        return std::nullopt;
    // divide out the common sigma power
    int min_exp = std::numeric_limits<int>::max();
    const int sig = Generators::instance().sigma();
    for (const auto &[m, n] : lhs.terms()) {
        int e = 0;
        for (const auto &[id, k] : m)
            if (id == sig)
                e = k;
        min_exp = std::min(min_exp, e);
    }
    if (min_exp != 0)
        lhs = lhs * Coefficient::sigma_power(-min_exp);
    // scale the lexicographically largest monomial to +1
    Number num = lhs.terms().rbegin()->second;
    lhs = lhs * Coefficient(Number(1) / num);
    return Equation{std::move(lhs), canonicalize(prov), order, std::move(label)};
}

std::vector<Forest> natural_protected(int g2, bool whites) {
    std::vector<NodeKind> drift{NodeKind::plain};
    if (whites)
        drift.push_back(NodeKind::white);
    std::vector<Forest> out;
    auto emit = [&](const Forest &f) {
        Forest c = canonicalize(f);
        for (const auto &g : out)
            if (g == c)
                return;
        out.push_back(c);
    };
    const int nk = static_cast<int>(drift.size());
    if (g2 == 4) {
        for (int x = 0; x < nk; ++x)
            for (int y = 0; y < nk; ++y) {
                Forest f = bare_root();
                f.add_edge(f.add({drift[x], -1}), 0);
                f.add_edge(f.add({drift[y], -1}), 0);
                emit(f);
            }
    } else if (g2 == 6) {
        for (int x = 0; x < nk; ++x)
            for (int y = 0; y < nk; ++y) {
                for (int z = 0; z < nk; ++z) {
                    Forest f = bare_root(); // phi'''(X, Y, Z)
                    f.add_edge(f.add({drift[x], -1}), 0);
                    f.add_edge(f.add({drift[y], -1}), 0);
                    f.add_edge(f.add({drift[z], -1}), 0);
                    emit(f);
                    Forest g = bare_root(); // phi''(X'Z, Y)
                    int a = g.add({drift[x], -1});
                    g.add_edge(a, 0);
                    g.add_edge(g.add({drift[y], -1}), 0);
                    g.add_edge(g.add({drift[z], -1}), a);
                    emit(g);
                }
                Forest h = bare_root(); // phi''(Lap X, Y)
                int a = h.add({drift[x], -1});
                h.add_edge(a, 0);
                h.add_liana(a, a);
                h.add_edge(h.add({drift[y], -1}), 0);
                emit(h);
            }
    }
    return out;
}

// -- generic coefficient symbols -------------------------------------------------

namespace {

std::string strip_spaces(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    return s;
}

} // namespace

Coefficient generic_symbol(const Forest &f, bool postprocessor) {
    const char *head = postprocessor ? "abar" : "a";
    const char *head_pretty = postprocessor ? "ā" : "a";
    const char *head_latex = postprocessor ? "\\overline{a}" : "a";
    Forest c = canonicalize(f);
    std::string name = std::string(head) + "(" + strip_spaces(detail::render_ascii(c)) + ")";
    std::string pretty = std::string(head_pretty) + "(" + render_differential(c) + ")";
    std::string latex = std::string(head_latex) + "(" + detail::render_ascii(c) + ")";
    return Coefficient::generator(Generators::instance().intern(name, pretty, latex));
}

namespace {

/// Free B-series with one symbol per rooted liana tree of the given grade.
/// Unbounded cutoff: callers compose these with other series.
Series generic_graded_series(int g2, bool postprocessor) {
    Series s(Series::unbounded);
    for (const auto &f :
         enumerate_forests(g2, {NodeKind::root, NodeKind::plain}, {.lianas = true}))
        if (grade2(f) == g2)
            s.add(f, generic_symbol(f, postprocessor));
    return s;
}

struct ClassOperators {
    std::vector<Series> A;    // A_0 .. (index = h-power - 1)
    std::vector<Series> Abar; // postprocessor operators, same indexing
    std::map<int, Coefficient> consistency;
    bool partitioned = false;
    bool has_post = false;
};

int single_generator_id(const Coefficient &c) {
    const Monomial &m = c.terms().begin()->first;
    return m[0].first;
}
int main_b_symbol() {
    Forest f;
    f.add(plain_node());
    Coefficient w = weight_symbol(f, WeightSlot::main);
    return single_generator_id(w);
}
int main_bh_symbol() {
    Forest f;
    f.add(white_node());
    Coefficient w = weight_symbol(f, WeightSlot::main);
    return single_generator_id(w);
}

ClassOperators class_operators(const SchemeClass &cls, int max_j, Assumption a) {
    ClassOperators out;
    const int cutoff2 = 2 * (max_j + 1);
    switch (cls.kind) {
    case SchemeClassKind::rk:
    case SchemeClassKind::rk_postprocessed: {
        SymbolicClass sc;
        sc.channels = cls.channels;
        sc.update_noise.assign(cls.channels, Coefficient(0));
        sc.update_noise[0] = Coefficient(1);
        out.A = operator_expansion_of(expand_grafted_symbolic(sc, cutoff2), max_j);
        if (cls.kind == SchemeClassKind::rk_postprocessed) {
            sc.post = true;
            out.Abar = operator_expansion_of(
                expand_grafted_symbolic(sc, cutoff2, WeightSlot::postprocessor), max_j);
            out.has_post = true;
        }
        out.consistency[main_b_symbol()] = Coefficient(1);
        break;
    }
    case SchemeClassKind::partitioned_postprocessed: {
        SymbolicClass sc;
        sc.partitioned = true;
        sc.channels = cls.channels;
        sc.update_noise.assign(cls.channels, Coefficient(0));
        sc.update_noise[0] = Coefficient(1);
        out.A = operator_expansion_of(expand_grafted_symbolic(sc, cutoff2), max_j);
        sc.post = true;
        sc.post_partitioned = true;
        out.Abar = operator_expansion_of(
            expand_grafted_symbolic(sc, cutoff2, WeightSlot::postprocessor), max_j);
        out.has_post = true;
        out.partitioned = true;
        out.consistency[main_b_symbol()] = Coefficient(1);
        if (a == Assumption::partitioned_gradients)
            out.consistency[main_bh_symbol()] = Coefficient(1);
        break;
    }
    case SchemeClassKind::generic:
    case SchemeClassKind::generic_postprocessed: {
        for (int j = 0; j <= max_j; ++j) {
            out.A.push_back(generic_graded_series(2 * (j + 1), false));
            out.Abar.push_back(generic_graded_series(2 * (j + 1), true));
        }
        out.has_post = cls.kind == SchemeClassKind::generic_postprocessed;
        break;
    }
    }
    return out;
}

void append_reduced_equations(ConditionSet &set, const Series &reduced, int order,
                              const std::string &label,
                              const std::map<int, Coefficient> &consistency) {
    for (const auto &[f, c] : reduced.terms()) {
        auto eq = make_equation(c.substitute(consistency), f, order, label);
        if (!eq)
            continue;
        bool dup = false;
        for (const auto &e : set.equations)
            dup |= (e.lhs == eq->lhs);
        if (!dup)
            set.equations.push_back(std::move(*eq));
    }
}

// order-1 block: reduce(A_0 - L); the perturbed drift's phi'f2 integrates to
// zero, so its weight is unconstrained there
void consistency_equations(ConditionSet &set, const ClassOperators &ops, Assumption a) {
    Series diff = ops.A[0] - generator(ops.partitioned).truncated(2);
    Series red = reduce(diff, a, {});
    append_reduced_equations(set, red, 1, "consistency", {});
}

} // namespace

ConditionSet invariant_measure_conditions(const SchemeClass &cls, int p, Assumption a,
                                          const std::vector<Forest> *protected_override) {
    if (p < 0 || p > 4)
        throw CutoffTooLarge("invariant-measure conditions support p in 0..4");
    bool post = cls.kind == SchemeClassKind::rk_postprocessed ||
                cls.kind == SchemeClassKind::partitioned_postprocessed ||
                cls.kind == SchemeClassKind::generic_postprocessed;
    const int top_j = post ? p : p - 1;
    ClassOperators ops = class_operators(cls, std::max(top_j, 0), a);

    ConditionSet set;
    set.assumption = a;
    set.order = post ? p + 1 : p;
    consistency_equations(set, ops, a);

    bool whites = ops.partitioned;
    for (int j = 1; j <= top_j; ++j) {
        Series target = ops.A[j];
        std::string label = "order " + std::to_string(j + 1);
        if (post && j == top_j) {
            target += lie_bracket(generator(whites).truncated(2 * (j + 1)), ops.Abar[j - 1]);
            label = "order " + std::to_string(j + 1) + " (postprocessed)";
        }
        std::vector<Forest> prot =
            protected_override ? *protected_override : natural_protected(2 * (j + 1), whites);
        Series red = reduce(target, a, prot);
        append_reduced_equations(set, red, j + 1, label, ops.consistency);
    }
    if (post && top_j >= 2) {
        // below the top grade the postprocessor must expand in powers of the
        // generator: Abar_0 proportional to L
        const Series &ab0 = ops.Abar[0];
        Coefficient cf = ab0.coefficient_of(chain(1));
        Coefficient shape = ab0.coefficient_of(root_with_self_lianas(1)) -
                            cf * Coefficient(Rational(1, 2)) * sigma2();
        if (auto eq = make_equation(shape, root_with_self_lianas(1), set.order,
                                    "postprocessor-shape"))
            set.equations.push_back(std::move(*eq));
        if (ops.partitioned) {
            Coefficient shape2 = ab0.coefficient_of(chain(1, {NodeKind::white})) - cf;
            if (auto eq = make_equation(shape2, chain(1, {NodeKind::white}), set.order,
                                        "postprocessor-shape"))
                set.equations.push_back(std::move(*eq));
        }
    }
    return set;
}

ConditionSet weak_order_conditions(const SchemeClass &cls, int p, Assumption a) {
    if (p < 1 || p > 3)
        throw CutoffTooLarge("weak conditions support p in 1..3");
    ClassOperators ops = class_operators(cls, p - 1, a);

    ConditionSet set;
    set.assumption = a;
    set.order = p;
    set.weak = true;
    for (int i = 1; i <= p; ++i) {
        Series diff = ops.A[i - 1];
        Series li = generator_power(i, 2 * i, ops.partitioned).graded_part(2 * i);
        Rational fact = 1;
        for (int k = 2; k <= i; ++k)
            fact *= k;
        diff -= li.scaled(Coefficient(Rational(1) / fact));
        if (a != Assumption::general) {
            Series merged(diff.cutoff2());
            for (const auto &[f, c] : diff.terms())
                merged += gradient_rewrite_series(f, a).scaled(c);
            diff = merged;
        }
        append_reduced_equations(set, diff, i, i == 1 ? "consistency" : "order " + std::to_string(i),
                                 i == 1 ? std::map<int, Coefficient>{} : ops.consistency);
    }
    // an identical left side with two different constants is unsatisfiable
    for (size_t i = 0; i < set.equations.size() && !set.inconsistent; ++i)
        for (size_t j = i + 1; j < set.equations.size() && !set.inconsistent; ++j) {
            Coefficient d = set.equations[i].lhs - set.equations[j].lhs;
            if (!d.is_zero() && d.is_constant()) {
                set.inconsistent = true;
                set.inconsistency_note = "incompatible pair: " + set.equations[i].pretty() +
                                         "  vs  " + set.equations[j].pretty();
            }
        }
    return set;
}

// -- numeric evaluation ------------------------------------------------------------

std::map<int, Coefficient> numeric_weight_map(const Scheme &s, int max_grade2) {
    std::map<int, Coefficient> out;
    auto fill = [&](const StageSet &st, WeightSlot slot) {
        bool whites = st.partition.has_value() ||
                      (slot == WeightSlot::postprocessor && s.main.partition.has_value());
        for (const auto &tree : weight_trees(max_grade2, whites, st.tableau.channels())) {
            Coefficient sym = weight_symbol(tree, slot);
            int gen_id = single_generator_id(sym);
            Coefficient val;
            if (whites && !st.partition) {
                // white nodes without a second tableau: weight vanishes
                bool has_white = false;
                for (const auto &nd : tree.nodes)
                    has_white |= nd.kind == NodeKind::white;
                val = has_white ? Coefficient(0) : elementary_weight(st, tree, false, slot);
            } else {
                val = elementary_weight(st, tree, false, slot);
            }
            out[gen_id] = val;
        }
    };
    fill(s.main, WeightSlot::main);
    int pd0 = Generators::instance().intern("pd0", "d̄_0", "\\overline{d}_0");
    if (s.postprocessor) {
        fill(*s.postprocessor, WeightSlot::postprocessor);
        out[pd0] = s.postprocessor->tableau.update_noise.at(0);
    } else {
        // absent postprocessor: identity output map
        StageSet empty;
        empty.tableau.s = 0;
        empty.tableau.update_noise = {Coefficient(0)};
        if (s.main.partition)
            empty.partition = Partition{{}, {}};
        fill(empty, WeightSlot::postprocessor);
        out[pd0] = Coefficient(0);
    }
    return out;
}

namespace {

bool equation_holds(const Equation &eq, const std::map<int, Coefficient> &vals, bool exact,
                    double tol) {
    Coefficient v = eq.lhs.substitute(vals);
    if (!v.is_constant())
        throw InternalError("unresolved symbols in condition: " + v.str());
    return exact ? v.is_zero() : v.near_zero(tol);
}

} // namespace

OrderReport check_tableau(const Scheme &s, Assumption a, int p_max) {
    if (p_max < 1 || p_max > 3)
        throw CutoffTooLarge("check_tableau supports p_max in 1..3");
    s.check_shape();
    if (s.main.partition && a != Assumption::partitioned_gradients &&
        a != Assumption::non_reversible && a != Assumption::non_reversible_j)
        throw AssumptionMismatch("partitioned scheme needs a two-drift assumption");

    OrderReport rep;
    rep.scheme_id = s.id;
    rep.exact_arithmetic = s.exact();
    rep.tolerance = rep.exact_arithmetic ? 0.0 : 1e-12;

    SchemeClass cls;
    cls.channels = s.main.tableau.channels();
    bool post = s.postprocessor.has_value();
    cls.kind = s.main.partition ? SchemeClassKind::partitioned_postprocessed
                                : (post ? SchemeClassKind::rk_postprocessed : SchemeClassKind::rk);

    auto vals = numeric_weight_map(s, 2 * (p_max + 1));

    // invariant-measure orders; postprocessed kinds shift the order index by
    // one (target order q needs base order q-1 plus the bracket condition)
    const bool post_kind = cls.kind != SchemeClassKind::rk;
    int im = 0;
    for (int q = 1; q <= p_max; ++q) {
        ConditionSet cs = invariant_measure_conditions(cls, post_kind ? q - 1 : q, a);
        bool ok = true;
        std::vector<std::string> failing;
        for (const auto &e : cs.equations)
            if (!equation_holds(e, vals, rep.exact_arithmetic, rep.tolerance)) {
                ok = false;
                failing.push_back(e.pretty());
            }
        if (ok)
            im = q;
        else {
            rep.failing_invariant_measure = failing;
            break;
        }
    }
    rep.invariant_measure_order = im;

    // weak order of the base chain
    int wk = 0;
    for (int q = 1; q <= p_max; ++q) {
        SchemeClass base = cls;
        base.kind = s.main.partition ? SchemeClassKind::partitioned_postprocessed
                                     : SchemeClassKind::rk;
        ConditionSet cs = weak_order_conditions(base, q, a);
        bool ok = !cs.inconsistent;
        std::vector<std::string> failing;
        if (cs.inconsistent)
            failing.push_back(cs.inconsistency_note);
        for (const auto &e : cs.equations)
            if (!equation_holds(e, vals, rep.exact_arithmetic, rep.tolerance)) {
                ok = false;
                failing.push_back(e.pretty());
            }
        if (ok)
            wk = q;
        else {
            rep.failing_weak = failing;
            break;
        }
    }
    rep.weak_order = wk;
    return rep;
}

// -- tables ------------------------------------------------------------------------

TableId table_id_from_string(const std::string &s) {
    static const std::map<std::string, TableId> m = {
        {"RK_IM", TableId::RK_IM},
        {"RK_WEAK_L2", TableId::RK_WEAK_L2},
        {"POSTPROCESSED_GENERAL_2", TableId::POSTPROCESSED_GENERAL_2},
        {"POSTPROCESSED_GENERAL_3", TableId::POSTPROCESSED_GENERAL_3},
        {"RK_POSTPROCESSED", TableId::RK_POSTPROCESSED},
        {"PARTITIONED", TableId::PARTITIONED},
        {"NONREVERSIBLE", TableId::NONREVERSIBLE},
        {"GAMMA0", TableId::GAMMA0},
        {"GAMMA1", TableId::GAMMA1},
        {"GAMMA2", TableId::GAMMA2},
    };
    auto it = m.find(s);
    if (it == m.end())
        throw ParseError("unknown table id '" + s + "'");
    return it->second;
}

std::string to_string(TableId id) {
    switch (id) {
    case TableId::RK_IM:
        return "RK_IM";
    case TableId::RK_WEAK_L2:
        return "RK_WEAK_L2";
    case TableId::POSTPROCESSED_GENERAL_2:
        return "POSTPROCESSED_GENERAL_2";
    case TableId::POSTPROCESSED_GENERAL_3:
        return "POSTPROCESSED_GENERAL_3";
    case TableId::RK_POSTPROCESSED:
        return "RK_POSTPROCESSED";
    case TableId::PARTITIONED:
        return "PARTITIONED";
    case TableId::NONREVERSIBLE:
        return "NONREVERSIBLE";
    case TableId::GAMMA0:
        return "GAMMA0";
    case TableId::GAMMA1:
        return "GAMMA1";
    case TableId::GAMMA2:
        return "GAMMA2";
    }
    return "?";
}

namespace {

Series reduced_generic(int g2, const std::vector<Forest> &prot) {
    Series s(g2);
    {
            s = generic_graded_series(g2, false);
    }
    return reduce(s, Assumption::gradient_f, prot);
}

} // namespace

TableResult reproduce_table(TableId id) {
    TableResult r;
    switch (id) {
    case TableId::RK_IM:
        r.conditions = invariant_measure_conditions({SchemeClassKind::rk, 1}, 3,
                                                    Assumption::gradient_f);
        break;
    case TableId::RK_WEAK_L2:
        r.conditions = weak_order_conditions({SchemeClassKind::rk, 2}, 3, Assumption::general);
        break;
    case TableId::POSTPROCESSED_GENERAL_2:
        r.conditions = invariant_measure_conditions({SchemeClassKind::generic_postprocessed, 1},
                                                    1, Assumption::gradient_f);
        break;
    case TableId::POSTPROCESSED_GENERAL_3:
        r.conditions = invariant_measure_conditions({SchemeClassKind::generic_postprocessed, 1},
                                                    2, Assumption::gradient_f);
        break;
    case TableId::RK_POSTPROCESSED: {
        ConditionSet two = invariant_measure_conditions({SchemeClassKind::rk_postprocessed, 1},
                                                        1, Assumption::gradient_f);
        ConditionSet three = invariant_measure_conditions({SchemeClassKind::rk_postprocessed, 1},
                                                          2, Assumption::gradient_f);
        ConditionSet merged = two;
        merged.order = 3;
        for (auto &e : three.equations)
            if (e.order >= 3)
                merged.equations.push_back(e);
        r.conditions = merged;
        break;
    }
    case TableId::PARTITIONED:
        r.conditions = invariant_measure_conditions(
            {SchemeClassKind::partitioned_postprocessed, 1}, 1,
            Assumption::partitioned_gradients);
        break;
    case TableId::NONREVERSIBLE:
        r.conditions = invariant_measure_conditions(
            {SchemeClassKind::partitioned_postprocessed, 1}, 1, Assumption::non_reversible);
        break;
    case TableId::GAMMA0:
        r.series = reduced_generic(2, {});
        break;
    case TableId::GAMMA1:
        r.series = reduced_generic(4, natural_protected(4, false));
        break;
    case TableId::GAMMA2:
        r.series = reduced_generic(6, natural_protected(6, false));
        break;
    }
    return r;
}

} // namespace xbs
