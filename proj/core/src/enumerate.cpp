#include "xbs/forest.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace xbs {

namespace {

bool kind_allowed(const std::vector<NodeKind> &kinds, NodeKind k) {
    return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

// Rooted tree skeletons: drift nodes first (parent among earlier nodes),
// grafted leaves last (parent among non-grafted). Duplicates are removed by
// canonical key afterwards.
void tree_skeletons(int n_drift, int n_cross, bool whites, int channels,
                    std::vector<Forest> &out) {
    std::vector<std::vector<int>> parents; // parent id per drift node 1..n_drift
    std::vector<int> cur;
    std::function<void(int)> rec_drift = [&](int i) {
        if (i > n_drift) {
            parents.push_back(cur);
            return;
        }
        for (int p = 0; p < i; ++p) {
            cur.push_back(p);
            rec_drift(i + 1);
            cur.pop_back();
        }
    };
    rec_drift(1);

    for (const auto &par : parents) {
        // colour assignments for drift nodes
        int ncolor = whites ? (1 << n_drift) : 1;
        for (int mask = 0; mask < ncolor; ++mask) {
            Forest base;
            base.add(root_node());
            for (int i = 0; i < n_drift; ++i) {
                int v = base.add((mask >> i) & 1 ? white_node() : plain_node());
                base.add_edge(v, par[i]);
            }
            // attach crosses: parent in 0..n_drift, channel in 1..channels
            std::function<void(int, Forest &)> rec_cross = [&](int c, Forest &f) {
                if (c == n_cross) {
                    out.push_back(f);
                    return;
                }
                for (int p = 0; p <= n_drift; ++p)
                    for (int ch = 1; ch <= channels; ++ch) {
                        Forest g = f;
                        int v = g.add(grafted_node(ch));
                        g.add_edge(v, p);
                        rec_cross(c + 1, g);
                    }
            };
            rec_cross(0, base);
        }
    }
}

// Connected components where every node has out-degree one (one cycle with
// hanging trees), or a square-rooted tree.
void aroma_skeletons(int n_nodes, bool whites, bool squares, std::vector<Forest> &out) {
    if (n_nodes < 1)
        return;
    int ncolor = whites ? (1 << n_nodes) : 1;
    // functional graphs on n nodes
    std::vector<int> target(n_nodes, 0);
    std::function<void(int)> rec = [&](int i) {
        if (i == n_nodes) {
            // connectivity of the undirected version
            std::vector<int> comp(n_nodes, -1);
            std::vector<int> stack{0};
            comp[0] = 0;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int v = 0; v < n_nodes; ++v)
                    if (comp[v] == -1 && (target[v] == u || target[u] == v)) {
                        comp[v] = 0;
                        stack.push_back(v);
                    }
            }
            if (std::count(comp.begin(), comp.end(), 0) != n_nodes)
                return;
            for (int mask = 0; mask < ncolor; ++mask) {
                Forest f;
                for (int v = 0; v < n_nodes; ++v)
                    f.add((mask >> v) & 1 ? white_node() : plain_node());
                for (int v = 0; v < n_nodes; ++v)
                    f.add_edge(v, target[v]);
                out.push_back(f);
            }
            return;
        }
        for (int t = 0; t < n_nodes; ++t) {
            target[i] = t;
            rec(i + 1);
        }
    };
    rec(0);

    if (squares) {
        // square sink + (n-1) drift nodes hanging off it
        int nd = n_nodes - 1;
        std::vector<int> par(nd, 0);
        std::function<void(int)> rec2 = [&](int i) {
            if (i == nd) {
                for (int mask = 0; mask < (whites ? (1 << nd) : 1); ++mask) {
                    Forest f;
                    f.add(square_node());
                    for (int v = 0; v < nd; ++v) {
                        f.add((mask >> v) & 1 ? white_node() : plain_node());
                        f.add_edge(v + 1, par[v]);
                    }
                    out.push_back(f);
                }
                return;
            }
            for (int p = 0; p <= i; ++p) {
                par[i] = p;
                rec2(i + 1);
            }
        };
        rec2(0);
    }
}

Forest merge_components(const Forest &a, const Forest &b) {
    Forest f = a;
    int off = a.size();
    for (const auto &nd : b.nodes)
        f.nodes.push_back(nd);
    for (const auto &e : b.edges)
        f.edges.push_back({e[0] + off, e[1] + off});
    for (const auto &l : b.lianas)
        f.lianas.push_back({l[0] + off, l[1] + off});
    return f;
}

void add_liana_multisets(const Forest &base, int n_lianas,
                         std::map<CanonicalKey, Forest> &sink) {
    std::vector<std::array<int, 2>> spots;
    for (int a = 0; a < base.size(); ++a) {
        if (base.nodes[a].kind == NodeKind::grafted)
            continue;
        for (int b = a; b < base.size(); ++b) {
            if (base.nodes[b].kind == NodeKind::grafted)
                continue;
            spots.push_back({a, b});
        }
    }
    std::function<void(Forest &, int, size_t)> rec = [&](Forest &f, int left, size_t from) {
        if (left == 0) {
            // no undifferentiated squares
            for (int v = 0; v < f.size(); ++v)
                if (f.nodes[v].kind == NodeKind::square && f.connection_degree(v) == 0)
                    return;
            Forest c = canonicalize(f);
            sink.emplace(canonical_key(c), c);
            return;
        }
        for (size_t s = from; s < spots.size(); ++s) {
            f.lianas.push_back(spots[s]);
            rec(f, left - 1, s);
            f.lianas.pop_back();
        }
    };
    Forest f = base;
    rec(f, n_lianas, 0);
}

} // namespace

std::vector<Forest> enumerate_forests(int max_grade2, const std::vector<NodeKind> &kinds,
                                      const EnumerateOptions &opts, int channels) {
    if (max_grade2 > 8)
        throw CutoffTooLarge("enumerate_forests supports grade2 <= 8, got " +
                             std::to_string(max_grade2));
    const bool plain = kind_allowed(kinds, NodeKind::plain);
    const bool white = kind_allowed(kinds, NodeKind::white);
    const bool crosses = kind_allowed(kinds, NodeKind::grafted);
    const bool squares = kind_allowed(kinds, NodeKind::square);
    const int max_drift = (plain || white) ? max_grade2 / 2 : 0;

    // root-component skeletons, by drift/cross count
    std::vector<Forest> rooted;
    for (int a = 0; a <= max_drift; ++a)
        for (int c = 0; 2 * a + c <= max_grade2; ++c) {
            if (c > 0 && !crosses)
                break;
            tree_skeletons(a, c, white, channels, rooted);
        }

    // optional aroma components
    std::vector<Forest> aromas{Forest{}}; // empty placeholder = no aroma
    if (opts.aromas) {
        std::vector<Forest> comps;
        for (int n = 1; 2 * n <= max_grade2; ++n)
            aroma_skeletons(n, white, squares, comps);
        // multisets of aroma components, bounded by total grade
        std::vector<Forest> grown{Forest{}};
        for (size_t start = 0; start < grown.size(); ++start) {
            Forest cur = grown[start];
            for (const auto &cmp : comps) {
                Forest m = merge_components(cur, cmp);
                if (grade2(m) <= max_grade2 && m.size() <= opts.max_nodes)
                    grown.push_back(m);
            }
            if (grown.size() > 20000)
                throw CutoffTooLarge("aroma enumeration exploded");
        }
        aromas = std::move(grown);
    }

    std::map<CanonicalKey, Forest> sink;
    for (const auto &rt : rooted) {
        for (const auto &ar : aromas) {
            Forest base = merge_components(rt, ar);
            if (base.size() > opts.max_nodes)
                continue;
            int g0 = grade2(base);
            if (g0 > max_grade2)
                continue;
            int max_l = opts.lianas ? (max_grade2 - g0) / 2 : 0;
            for (int l = 0; l <= max_l; ++l)
                add_liana_multisets(base, l, sink);
        }
    }

    std::vector<Forest> out;
    for (auto &[k, f] : sink)
        out.push_back(f);
    std::sort(out.begin(), out.end(), ForestLess{});
    return out;
}

} // namespace xbs
