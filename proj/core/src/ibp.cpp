#include "xbs/ibp.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

namespace xbs {

Assumption assumption_from_string(const std::string &s) {
    if (s == "general")
        return Assumption::general;
    if (s == "gradient")
        return Assumption::gradient_f;
    if (s == "partitioned")
        return Assumption::partitioned_gradients;
    if (s == "nonrev")
        return Assumption::non_reversible;
    if (s == "nonrev-j")
        return Assumption::non_reversible_j;
    throw ParseError("unknown assumption '" + s + "'");
}

std::string to_string(Assumption a) {
    switch (a) {
    case Assumption::general:
        return "general";
    case Assumption::gradient_f:
        return "gradient";
    case Assumption::partitioned_gradients:
        return "partitioned";
    case Assumption::non_reversible:
        return "nonrev";
    case Assumption::non_reversible_j:
        return "nonrev-j";
    }
    return "?";
}

namespace {

int require_root(const Forest &f) {
    auto r = f.root();
    if (!r)
        throw ShapeError("forest has no root");
    return *r;
}

bool whites_allowed(Assumption a) {
    return a == Assumption::partitioned_gradients || a == Assumption::non_reversible ||
           a == Assumption::non_reversible_j;
}

void check_kinds(const Forest &f, Assumption a) {
    for (const auto &nd : f.nodes) {
        if (nd.kind == NodeKind::grafted)
            throw ShapeError("reduction requires grafted-free forests");
        if (nd.kind == NodeKind::white && !whites_allowed(a))
            throw AssumptionMismatch("white node under assumption " + to_string(a));
    }
}

} // namespace

Series ibp_step(const Forest &f, const Connection &c) {
    require_valid(f);
    const int r = require_root(f);
    if (f.connection_degree(r) == 0)
        throw BareRoot("root has no connection to move");

    // the surviving attachment point of the moved connection
    int anchor; // node keeping its end; -1 encodes "edge source"
    if (c.is_liana) {
        if (c.index < 0 || c.index >= static_cast<int>(f.lianas.size()))
            throw NotIncident("liana index out of range");
        const auto &l = f.lianas[c.index];
        if (c.endpoint < 0 || c.endpoint > 1 || l[c.endpoint] != r)
            throw NotIncident("liana endpoint is not at the root");
        anchor = l[1 - c.endpoint];
    } else {
        if (c.index < 0 || c.index >= static_cast<int>(f.edges.size()))
            throw NotIncident("edge index out of range");
        if (f.edges[c.index][1] != r)
            throw NotIncident("edge does not point at the root");
        anchor = -1;
    }

    Series out(Series::unbounded);
    auto emit = [&](int target_or_square) {
        Forest g = f;
        int target = target_or_square;
        if (target < 0)
            target = g.add(square_node());
        if (c.is_liana) {
            int other = g.lianas[c.index][1 - c.endpoint];
            g.lianas.erase(g.lianas.begin() + c.index);
            g.add_liana(other, target);
        } else {
            g.edges[c.index][1] = target;
        }
        out.add(g, Coefficient(-1));
    };
    for (int v = 0; v < f.size(); ++v)
        if (v != r && f.nodes[v].kind != NodeKind::grafted)
            emit(v);
    emit(-1);
    (void)anchor;
    return out;
}

Connection first_connection(const Forest &f) {
    const int r = require_root(f);
    for (size_t l = 0; l < f.lianas.size(); ++l) {
        if (f.lianas[l][0] == r)
            return {true, static_cast<int>(l), 0};
        if (f.lianas[l][1] == r)
            return {true, static_cast<int>(l), 1};
    }
    for (size_t e = 0; e < f.edges.size(); ++e)
        if (f.edges[e][1] == r)
            return {false, static_cast<int>(e), 0};
    throw BareRoot("root has no connection");
}

// -- pointwise rewrites ---------------------------------------------------------

namespace {

// Component/derivative exchange at a gradient node: swap the outgoing edge
// with one liana end. edge(v->s) + liana{v,m}  ->  edge(v->m) + liana{v,s}.
std::vector<Forest> r1_moves(const Forest &f, Assumption a) {
    std::vector<Forest> out;
    for (int v = 0; v < f.size(); ++v) {
        NodeKind k = f.nodes[v].kind;
        bool eligible = (k == NodeKind::plain) ||
                        (k == NodeKind::white && a == Assumption::partitioned_gradients);
        if (!eligible)
            continue;
        int eidx = -1;
        for (size_t e = 0; e < f.edges.size(); ++e)
            if (f.edges[e][0] == v)
                eidx = static_cast<int>(e);
        if (eidx < 0)
            continue;
        const int s = f.edges[eidx][1];
        for (size_t l = 0; l < f.lianas.size(); ++l) {
            for (int end = 0; end < 2; ++end) {
                if (f.lianas[l][end] != v)
                    continue;
                int m = f.lianas[l][1 - end];
                Forest g = f;
                g.edges[eidx][1] = m;
                g.lianas.erase(g.lianas.begin() + l);
                g.add_liana(v, s);
                out.push_back(canonicalize(g));
                if (f.lianas[l][0] == f.lianas[l][1])
                    break; // both ends of a self-liana give the same move
            }
        }
    }
    return out;
}

std::vector<Forest> r1_orbit(const Forest &f, Assumption a) {
    std::set<CanonicalKey> seen;
    std::vector<Forest> orbit{canonicalize(f)};
    seen.insert(canonical_key(orbit[0]));
    for (size_t i = 0; i < orbit.size(); ++i) {
        for (const auto &g : r1_moves(orbit[i], a)) {
            CanonicalKey k = canonical_key(g);
            if (seen.insert(k).second)
                orbit.push_back(g);
        }
        if (orbit.size() > 4000)
            throw InternalError("runaway symmetry orbit");
    }
    std::sort(orbit.begin(), orbit.end(), ForestLess{});
    return orbit;
}

// square with at least one liana -> drift node whose outgoing edge replaces
// the lexicographically first liana; factor 2/sigma^2 per replacement
struct R2Site {
    int square, liana;
};
std::optional<R2Site> find_r2(const Forest &f) {
    for (int v = 0; v < f.size(); ++v) {
        if (f.nodes[v].kind != NodeKind::square)
            continue;
        for (size_t l = 0; l < f.lianas.size(); ++l)
            if (f.lianas[l][0] == v || f.lianas[l][1] == v)
                return R2Site{v, static_cast<int>(l)};
    }
    return std::nullopt;
}

Forest apply_r2(const Forest &f, const R2Site &site, NodeKind color) {
    Forest g = f;
    const auto l = g.lianas[site.liana];
    int other = l[0] == site.square ? l[1] : l[0];
    g.lianas.erase(g.lianas.begin() + site.liana);
    g.nodes[site.square] = {color, -1};
    g.add_edge(site.square, other == site.square ? site.square : other);
    return g;
}

// bare divergence aroma of the perturbation: one white node, loop edge, no
// other attachments
bool is_bare_white_loop(const Forest &f, int v) {
    if (f.nodes[v].kind != NodeKind::white)
        return false;
    bool loop = false;
    for (const auto &e : f.edges) {
        if (e[0] == v && e[1] == v)
            loop = true;
        else if (e[0] == v || e[1] == v)
            return false;
    }
    for (const auto &l : f.lianas)
        if (l[0] == v || l[1] == v)
            return false;
    return loop;
}

// its twin: white -> square, both otherwise bare
bool is_bare_white_square(const Forest &f, int w, int s) {
    if (f.nodes[w].kind != NodeKind::white || f.nodes[s].kind != NodeKind::square)
        return false;
    bool edge = false;
    for (const auto &e : f.edges) {
        if (e[0] == w && e[1] == s)
            edge = true;
        else if (e[0] == w || e[1] == w || e[0] == s || e[1] == s)
            return false;
    }
    for (const auto &l : f.lianas)
        if (l[0] == w || l[1] == w || l[0] == s || l[1] == s)
            return false;
    return edge;
}

int find_bare_white_loop(const Forest &f) {
    for (int v = 0; v < f.size(); ++v)
        if (is_bare_white_loop(f, v))
            return v;
    return -1;
}

bool has_bare_white_square(const Forest &f) {
    for (int w = 0; w < f.size(); ++w)
        for (int s = 0; s < f.size(); ++s)
            if (w != s && is_bare_white_square(f, w, s))
                return true;
    return false;
}

} // namespace

Series gradient_rewrite_series(const Forest &f0, Assumption a) {
    check_kinds(f0, a);
    if (a == Assumption::general)
        return Series::term(f0);

    Series out(Series::unbounded);
    std::vector<std::pair<Forest, Coefficient>> work{{canonicalize(f0), Coefficient(1)}};
    int budget = 10000;
    while (!work.empty()) {
        auto [g, coeff] = work.back();
        work.pop_back();
        if (--budget < 0)
            throw InternalError("rewrite budget exhausted");

        if (a == Assumption::non_reversible_j &&
            (find_bare_white_loop(g) >= 0 || has_bare_white_square(g)))
            continue; // both patterns vanish for f2 = J grad V
        if (a == Assumption::non_reversible || a == Assumption::non_reversible_j) {
            int v = find_bare_white_loop(g);
            if (v >= 0) {
                // div f2 = -g' f2
                Forest h = g;
                for (auto &e : h.edges)
                    if (e[0] == v && e[1] == v) {
                        int s = h.add(square_node());
                        e[1] = s;
                        break;
                    }
                work.emplace_back(canonicalize(h), -coeff);
                continue;
            }
        }

        auto orbit = r1_orbit(g, a);
        bool rewritten = false;
        for (const auto &m : orbit) {
            if (auto site = find_r2(m)) {
                Coefficient factor = Coefficient(2) * Coefficient::sigma_power(-2) * coeff;
                work.emplace_back(canonicalize(apply_r2(m, *site, NodeKind::plain)), factor);
                if (a == Assumption::partitioned_gradients)
                    work.emplace_back(canonicalize(apply_r2(m, *site, NodeKind::white)), factor);
                rewritten = true;
                break;
            }
        }
        if (rewritten)
            continue;
        out.add(orbit.front(), coeff);
    }
    return out;
}

std::pair<Forest, Coefficient> gradient_rewrite(const Forest &f, Assumption a) {
    Series s = gradient_rewrite_series(f, a);
    if (s.size() != 1)
        throw ShapeError("rewrite branched into " + std::to_string(s.size()) + " terms");
    const auto &[g, c] = *s.terms().begin();
    return {g, c};
}

// -- reduction -------------------------------------------------------------------

namespace {

int root_degree(const Forest &f) {
    auto r = f.root();
    return r ? f.connection_degree(*r) : 0;
}

bool is_bare_white_trunk(const Forest &f) {
    // exactly the two-node tree phi' f2; integrates to zero for the
    // divergence-free perturbation
    return f.size() == 2 && f.lianas.empty() && f.edges.size() == 1 && f.root() &&
           f.nodes[1 - *f.root()].kind == NodeKind::white;
}

struct Reducer {
    Assumption a;
    std::map<CanonicalKey, Series> memo;
    long steps = 0;

    const Series &reduce_forest(const Forest &f0) {
        Forest f = canonicalize(f0);
        CanonicalKey key = canonical_key(f);
        auto it = memo.find(key);
        if (it != memo.end())
            return it->second;
        if (++steps > 1000000)
            throw InternalError("reduction step budget exhausted");

        Series result(Series::unbounded);
        Series norm = gradient_rewrite_series(f, a);
        for (const auto &[g, factor] : norm.terms()) {
            const int deg = root_degree(g);
            bool expand = deg > 1;
            if (!expand && deg == 1 &&
                (a == Assumption::non_reversible || a == Assumption::non_reversible_j))
                expand = is_bare_white_trunk(g);
            if (!expand) {
                result.add(g, factor);
                continue;
            }
            Series step = ibp_step(g, first_connection(g));
            for (const auto &[h, m] : step.terms()) {
                if (root_degree(h) >= root_degree(g))
                    throw InternalError("integration by parts did not reduce the root degree");
                result += reduce_forest(h).scaled(factor * m);
            }
        }
        return memo.emplace(std::move(key), std::move(result)).first->second;
    }
};

std::mutex reducer_mutex;
std::map<Assumption, Reducer> reducers;

Series reduce_full(const Series &s, Assumption a) {
    std::lock_guard lock(reducer_mutex);
    Reducer &red = reducers.try_emplace(a, Reducer{a, {}, 0}).first->second;
    red.steps = 0;
    Series out(s.cutoff2());
    for (const auto &[f, c] : s.terms()) {
        check_kinds(f, a);
        out += red.reduce_forest(f).scaled(c);
    }
    return out;
}

} // namespace

bool is_clean_basis_forest(const Forest &f) {
    auto r = f.root();
    if (!r)
        return false;
    for (const auto &nd : f.nodes)
        if (nd.kind == NodeKind::square)
            return false;
    // single component: every non-root node must reach the root along edges
    for (int v = 0; v < f.size(); ++v) {
        if (v == *r)
            continue;
        int u = v, guard = 0;
        while (u != *r && guard++ <= f.size()) {
            int next = -1;
            for (const auto &e : f.edges)
                if (e[0] == u)
                    next = e[1];
            if (next < 0)
                return false;
            u = next;
        }
        if (u != *r)
            return false;
    }
    return f.size() == 1 || root_degree(f) == 1;
}

Series reduce(const Series &s, Assumption a, const std::vector<Forest> &protected_set) {
    // pass protected terms through, reduce the rest; a candidate whose own
    // reduction leaves no square/aroma residue simplifies fine and is not
    // worth protecting (the divergence-free rules clean some cherries up)
    std::vector<std::pair<Forest, CanonicalKey>> prot;
    for (const auto &p : protected_set) {
        Forest cp = canonicalize(p);
        Series r = reduce_full(Series::term(cp), a);
        bool has_dirty = false;
        for (const auto &[f, c] : r.terms())
            has_dirty |= !is_clean_basis_forest(f);
        if (has_dirty)
            prot.emplace_back(cp, canonical_key(cp));
    }
    auto is_protected = [&](const Forest &f) {
        CanonicalKey k = canonical_key(f);
        for (const auto &[cp, pk] : prot)
            if (pk == k)
                return true;
        return false;
    };

    Series rest(s.cutoff2());
    Series out(s.cutoff2());
    for (const auto &[f, c] : s.terms()) {
        if (is_protected(f))
            out.add(f, c);
        else
            rest.add(f, c);
    }
    Series reduced = reduce_full(rest, a);
    if (prot.empty()) {
        out += reduced;
        return out;
    }

    // split into clean basis part and square/aroma residue
    Series clean(s.cutoff2()), dirty(s.cutoff2());
    for (const auto &[f, c] : reduced.terms())
        (is_clean_basis_forest(f) ? clean : dirty).add(f, c);
    if (dirty.empty()) {
        out += clean;
        return out;
    }

    // express the residue through the fully reduced protected forests:
    // solve sum_i lambda_i * r_dirty(tau_i) = dirty
    std::vector<Series> r_clean, r_dirty;
    for (const auto &[cp, pk] : prot) {
        Series r = reduce_full(Series::term(cp), a);
        Series rc(s.cutoff2()), rd(s.cutoff2());
        for (const auto &[f, c] : r.terms())
            (is_clean_basis_forest(f) ? rc : rd).add(f, c);
        r_clean.push_back(std::move(rc));
        r_dirty.push_back(std::move(rd));
    }

    const size_t np = prot.size();
    struct Eq {
        std::vector<Coefficient> lhs;
        Coefficient rhs;
    };
    std::map<Forest, Eq, ForestLess> eqs;
    auto eq_for = [&](const Forest &f) -> Eq & {
        auto it = eqs.find(f);
        if (it == eqs.end())
            it = eqs.emplace(f, Eq{std::vector<Coefficient>(np), Coefficient()}).first;
        return it->second;
    };
    for (size_t i = 0; i < np; ++i)
        for (const auto &[f, c] : r_dirty[i].terms())
            eq_for(f).lhs[i] = c;
    for (const auto &[f, c] : dirty.terms())
        eq_for(f).rhs = c;

    std::vector<Eq> rows;
    for (auto &[f, e] : eqs)
        rows.push_back(std::move(e));

    // Gaussian elimination; pivots are sigma-monomials, hence invertible.
    // The final recomputation check below is the arbiter, so a missing pivot
    // merely leaves the residue unabsorbed.
    std::vector<Coefficient> lambda(np);
    std::vector<int> pivot_of(np, -1);
    std::vector<bool> used(rows.size(), false);
    for (size_t i = 0; i < np; ++i) {
        size_t piv = rows.size();
        for (size_t rix = 0; rix < rows.size() && piv == rows.size(); ++rix)
            if (!used[rix] && rows[rix].lhs[i].terms().size() == 1)
                piv = rix;
        if (piv == rows.size())
            continue;
        used[piv] = true;
        pivot_of[i] = static_cast<int>(piv);
        Coefficient p = rows[piv].lhs[i];
        for (auto &l : rows[piv].lhs)
            l = l.divided_by_monomial(p);
        rows[piv].rhs = rows[piv].rhs.divided_by_monomial(p);
        for (size_t rix = 0; rix < rows.size(); ++rix) {
            if (rix == piv || rows[rix].lhs[i].is_zero())
                continue;
            Coefficient m = rows[rix].lhs[i];
            for (size_t j = 0; j < np; ++j)
                rows[rix].lhs[j] -= m * rows[piv].lhs[j];
            rows[rix].rhs -= m * rows[piv].rhs;
        }
    }
    for (size_t i = 0; i < np; ++i)
        if (pivot_of[i] >= 0)
            lambda[i] = rows[pivot_of[i]].rhs;

    // verify the solution reproduces the residue exactly
    Series check = dirty;
    for (size_t i = 0; i < np; ++i)
        check -= r_dirty[i].scaled(lambda[i]);
    if (!check.empty()) {
        // not in the protected span: report the residue untouched
        out += clean;
        out += dirty;
        return out;
    }

    out += clean;
    for (size_t i = 0; i < np; ++i) {
        out.add(prot[i].first, lambda[i]);
        out -= r_clean[i].scaled(lambda[i]);
    }
    return out;
}

std::pair<bool, Series> equivalent_zero(const Series &s, Assumption a) {
    Series w = reduce(s, a, {});
    return {w.empty(), w};
}

} // namespace xbs
