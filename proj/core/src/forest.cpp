#include "xbs/forest.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace xbs {

std::optional<int> Forest::root() const {
    for (int v = 0; v < size(); ++v)
        if (nodes[v].kind == NodeKind::root)
            return v;
    return std::nullopt;
}

int Forest::out_degree(int v) const {
    int d = 0;
    for (const auto &e : edges)
        d += (e[0] == v);
    return d;
}

int Forest::connection_degree(int v) const {
    int d = 0;
    for (const auto &e : edges)
        d += (e[1] == v);
    for (const auto &l : lianas)
        d += (l[0] == v) + (l[1] == v);
    return d;
}

std::vector<int> Forest::count_kinds() const {
    std::vector<int> c(5, 0);
    for (const auto &n : nodes)
        ++c[static_cast<int>(n.kind)];
    return c;
}

std::vector<std::string> validate(const Forest &f) {
    std::vector<std::string> bad;
    const int n = f.size();
    auto node_str = [](int v) { return std::to_string(v); };

    for (int v = 0; v < n; ++v) {
        const Node &nd = f.nodes[v];
        if (nd.kind == NodeKind::grafted && nd.channel < 0)
            bad.push_back("grafted node " + node_str(v) + " lacks a channel");
        if (nd.kind != NodeKind::grafted && nd.channel >= 0)
            bad.push_back("non-grafted node " + node_str(v) + " carries a channel");
    }
    for (const auto &e : f.edges)
        if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n)
            bad.push_back("edge (" + node_str(e[0]) + "," + node_str(e[1]) + ") out of range");
    for (const auto &l : f.lianas)
        if (l[0] < 0 || l[0] >= n || l[1] < 0 || l[1] >= n)
            bad.push_back("liana (" + node_str(l[0]) + "," + node_str(l[1]) + ") out of range");
    if (!bad.empty())
        return bad; // id checks below assume well-formed ids

    int n_root = 0;
    for (int v = 0; v < n; ++v)
        n_root += (f.nodes[v].kind == NodeKind::root);
    if (n_root > 1)
        bad.push_back("more than one root node");

    for (int v = 0; v < n; ++v) {
        const Node &nd = f.nodes[v];
        const int out = f.out_degree(v);
        if (out > 1)
            bad.push_back("node " + node_str(v) + " has out-degree > 1");
        if ((nd.kind == NodeKind::root || nd.kind == NodeKind::square) && out != 0)
            bad.push_back("node " + node_str(v) + " (root/square) has an outgoing edge");
        if (nd.kind == NodeKind::grafted) {
            if (out != 1)
                bad.push_back("grafted node " + node_str(v) + " needs out-degree exactly 1");
            int in = 0, li = 0;
            for (const auto &e : f.edges)
                in += (e[1] == v);
            for (const auto &l : f.lianas)
                li += (l[0] == v) + (l[1] == v);
            if (in > 0)
                bad.push_back("grafted node " + node_str(v) + " has an incoming edge");
            if (li > 0)
                bad.push_back("grafted node " + node_str(v) + " carries a liana");
        }
    }

    // each directed component carries at most one cycle: #edges <= #nodes
    {
        std::vector<int> comp(n, -1);
        int nc = 0;
        for (int v = 0; v < n; ++v) {
            if (comp[v] != -1)
                continue;
            std::vector<int> stack{v};
            comp[v] = nc;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (const auto &e : f.edges) {
                    for (int w : {e[0], e[1]}) {
                        if ((e[0] == u || e[1] == u) && comp[w] == -1) {
                            comp[w] = nc;
                            stack.push_back(w);
                        }
                    }
                }
            }
            ++nc;
        }
        std::vector<int> nn(nc, 0), ne(nc, 0);
        for (int v = 0; v < n; ++v)
            ++nn[comp[v]];
        for (const auto &e : f.edges)
            ++ne[comp[e[0]]];
        for (int c = 0; c < nc; ++c)
            if (ne[c] > nn[c])
                bad.push_back("directed component " + std::to_string(c) + " has more than one cycle");
        if (n_root == 1) {
            int rc = comp[*f.root()];
            if (ne[rc] != nn[rc] - 1)
                bad.push_back("root component is not a tree");
        }
    }
    return bad;
}

void require_valid(const Forest &f) {
    auto bad = validate(f);
    if (!bad.empty()) {
        std::string msg;
        for (const auto &b : bad)
            msg += (msg.empty() ? "" : "; ") + b;
        throw InvalidForest(msg);
    }
}

int grade2(const Forest &f) {
    int drift = 0, grafted = 0;
    for (const auto &nd : f.nodes) {
        drift += (nd.kind == NodeKind::plain || nd.kind == NodeKind::white);
        grafted += (nd.kind == NodeKind::grafted);
    }
    return 2 * drift + 2 * static_cast<int>(f.lianas.size()) + grafted;
}

// -- canonicalization ---------------------------------------------------------

namespace {

// Iterated colour refinement. Colours depend only on kinds and adjacency,
// never on labels, so the final partition is isomorphism-invariant.
std::vector<int> refine_colors(const Forest &f) {
    const int n = f.size();
    std::vector<int> color(n);
    {
        std::vector<std::pair<std::pair<int, int>, int>> init(n);
        for (int v = 0; v < n; ++v)
            init[v] = {{static_cast<int>(f.nodes[v].kind), f.nodes[v].channel}, v};
        std::sort(init.begin(), init.end());
        std::map<std::pair<int, int>, int> idx;
        for (const auto &[sig, v] : init) {
            auto it = idx.find(sig);
            if (it == idx.end())
                it = idx.emplace(sig, static_cast<int>(idx.size())).first;
            color[v] = it->second;
        }
    }
    for (int round = 0; round <= n; ++round) {
        using Sig = std::tuple<int, std::vector<int>, std::vector<int>, std::vector<int>>;
        std::vector<Sig> sig(n);
        for (int v = 0; v < n; ++v) {
            std::vector<int> out, in, li;
            for (const auto &e : f.edges) {
                if (e[0] == v)
                    out.push_back(color[e[1]]);
                if (e[1] == v)
                    in.push_back(color[e[0]]);
            }
            for (const auto &l : f.lianas) {
                if (l[0] == v && l[1] == v) {
                    li.push_back(-1); // self-liana marker
                    li.push_back(-1);
                } else if (l[0] == v)
                    li.push_back(color[l[1]]);
                else if (l[1] == v)
                    li.push_back(color[l[0]]);
            }
            std::sort(in.begin(), in.end());
            std::sort(li.begin(), li.end());
            sig[v] = {color[v], out, in, li};
        }
        std::vector<Sig> uniq(sig);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        std::vector<int> next(n);
        for (int v = 0; v < n; ++v)
            next[v] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), sig[v]) - uniq.begin());
        if (next == color)
            break;
        color = next;
    }
    return color;
}

CanonicalKey encode(const Forest &f, const std::vector<int> &label) {
    CanonicalKey k;
    const int n = f.size();
    k.data.push_back(n);
    std::vector<std::pair<int, int>> kinds(n);
    for (int v = 0; v < n; ++v)
        kinds[label[v]] = {static_cast<int>(f.nodes[v].kind), f.nodes[v].channel};
    for (auto &[a, b] : kinds) {
        k.data.push_back(a);
        k.data.push_back(b);
    }
    std::vector<std::array<int, 2>> es;
    for (const auto &e : f.edges)
        es.push_back({label[e[0]], label[e[1]]});
    std::sort(es.begin(), es.end());
    k.data.push_back(static_cast<int>(es.size()));
    for (const auto &e : es) {
        k.data.push_back(e[0]);
        k.data.push_back(e[1]);
    }
    std::vector<std::array<int, 2>> ls;
    for (const auto &l : f.lianas) {
        int a = label[l[0]], b = label[l[1]];
        if (a > b)
            std::swap(a, b);
        ls.push_back({a, b});
    }
    std::sort(ls.begin(), ls.end());
    k.data.push_back(static_cast<int>(ls.size()));
    for (const auto &l : ls) {
        k.data.push_back(l[0]);
        k.data.push_back(l[1]);
    }
    return k;
}

void min_label_search(const Forest &f, const std::vector<std::vector<int>> &classes, size_t ci,
                      std::vector<int> &label, int &next, CanonicalKey &best, bool &have) {
    if (ci == classes.size()) {
        CanonicalKey k = encode(f, label);
        if (!have || k < best) {
            best = std::move(k);
            have = true;
        }
        return;
    }
    std::vector<int> cls = classes[ci];
    std::sort(cls.begin(), cls.end());
    do {
        for (int v : cls)
            label[v] = next++;
        min_label_search(f, classes, ci + 1, label, next, best, have);
        next -= static_cast<int>(cls.size());
    } while (std::next_permutation(cls.begin(), cls.end()));
}

} // namespace

CanonicalKey canonical_key(const Forest &f) {
    require_valid(f);
    const int n = f.size();
    std::vector<int> color = refine_colors(f);
    int nc = color.empty() ? 0 : *std::max_element(color.begin(), color.end()) + 1;
    std::vector<std::vector<int>> classes(nc);
    for (int v = 0; v < n; ++v)
        classes[color[v]].push_back(v);

    std::vector<int> label(n, -1);
    int next = 0;
    CanonicalKey best;
    bool have = false;
    min_label_search(f, classes, 0, label, next, best, have);
    return best;
}

namespace {

Forest forest_from_key(const CanonicalKey &k) {
    Forest f;
    size_t p = 0;
    const auto &d = k.data;
    int n = d[p++];
    for (int v = 0; v < n; ++v) {
        Node nd;
        nd.kind = static_cast<NodeKind>(d[p++]);
        nd.channel = d[p++];
        f.nodes.push_back(nd);
    }
    int ne = d[p++];
    for (int i = 0; i < ne; ++i) {
        int a = d[p], b = d[p + 1];
        p += 2;
        f.edges.push_back({a, b});
    }
    int nl = d[p++];
    for (int i = 0; i < nl; ++i) {
        int a = d[p], b = d[p + 1];
        p += 2;
        f.lianas.push_back({a, b});
    }
    return f;
}

} // namespace

Forest canonicalize(const Forest &f) { return forest_from_key(canonical_key(f)); }

bool is_canonical(const Forest &f) { return canonicalize(f) == f; }

bool ForestLess::operator()(const Forest &a, const Forest &b) const {
    int ga = grade2(a), gb = grade2(b);
    if (ga != gb)
        return ga < gb;
    return encode(a, [&] {
               std::vector<int> id(a.size());
               std::iota(id.begin(), id.end(), 0);
               return id;
           }()) < encode(b, [&] {
               std::vector<int> id(b.size());
               std::iota(id.begin(), id.end(), 0);
               return id;
           }());
}

bool isomorphic(const Forest &a, const Forest &b) { return canonical_key(a) == canonical_key(b); }

bool isomorphic_brute_force(const Forest &a, const Forest &b) {
    if (a.size() != b.size() || a.edges.size() != b.edges.size() ||
        a.lianas.size() != b.lianas.size())
        return false;
    const int n = a.size();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    auto multiset_of = [](const Forest &f) {
        auto ls = f.lianas;
        for (auto &l : ls)
            if (l[0] > l[1])
                std::swap(l[0], l[1]);
        std::sort(ls.begin(), ls.end());
        auto es = f.edges;
        std::sort(es.begin(), es.end());
        return std::make_pair(es, ls);
    };
    auto [be, bl] = multiset_of(b);
    do {
        bool kinds_ok = true;
        for (int v = 0; v < n && kinds_ok; ++v)
            kinds_ok = a.nodes[v] == b.nodes[perm[v]];
        if (!kinds_ok)
            continue;
        Forest m = b;
        m.edges.clear();
        m.lianas.clear();
        for (const auto &e : a.edges)
            m.edges.push_back({perm[e[0]], perm[e[1]]});
        for (const auto &l : a.lianas)
            m.add_liana(perm[l[0]], perm[l[1]]);
        auto [me, ml] = multiset_of(m);
        if (me == be && ml == bl)
            return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

// -- builders -----------------------------------------------------------------

Forest bare_root() {
    Forest f;
    f.add(root_node());
    return f;
}

Forest chain(int n_drift, const std::vector<NodeKind> &kinds) {
    Forest f;
    int prev = f.add(root_node());
    for (int i = 0; i < n_drift; ++i) {
        NodeKind k = i < static_cast<int>(kinds.size()) ? kinds[i] : NodeKind::plain;
        int v = f.add({k, -1});
        f.add_edge(v, prev);
        prev = v;
    }
    return f;
}

Forest root_with_self_lianas(int n) {
    Forest f = bare_root();
    for (int i = 0; i < n; ++i)
        f.add_liana(0, 0);
    return f;
}

Forest root_with_crosses(int n, int channel) {
    Forest f = bare_root();
    for (int i = 0; i < n; ++i) {
        int v = f.add(grafted_node(channel));
        f.add_edge(v, 0);
    }
    return f;
}

} // namespace xbs
