#include "xbs/expand.hpp"

#include "xbs/calculus.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace xbs {

namespace {

struct TreeView {
    const Forest &f;
    int root;
    std::vector<std::vector<int>> kids;

    explicit TreeView(const Forest &fr) : f(fr) {
        root = -1;
        for (int v = 0; v < f.size(); ++v) {
            if (f.nodes[v].kind == NodeKind::root || f.nodes[v].kind == NodeKind::square)
                throw ShapeError("weight trees are rooted at a drift node");
            if (f.out_degree(v) == 0) {
                if (root != -1)
                    throw ShapeError("weight tree has two sinks");
                root = v;
            }
        }
        if (!f.lianas.empty())
            throw ShapeError("weight trees carry no lianas");
        if (root == -1 || f.nodes[root].kind == NodeKind::grafted)
            throw ShapeError("weight tree needs a drift root");
        kids.assign(f.size(), {});
        for (const auto &e : f.edges)
            kids[e[1]].push_back(e[0]);
    }
};

// label-free structural key of the subtree at v
std::string subtree_key(const Forest &f, int v, const std::vector<std::vector<int>> &kids) {
    std::string s = "(" + std::to_string(static_cast<int>(f.nodes[v].kind)) + ":" +
                    std::to_string(f.nodes[v].channel);
    std::vector<std::string> parts;
    for (int c : kids[v])
        parts.push_back(subtree_key(f, c, kids));
    std::sort(parts.begin(), parts.end());
    for (const auto &p : parts)
        s += p;
    return s + ")";
}

// -- weight symbol names -------------------------------------------------------

struct SymbolPieces {
    std::string name, pretty, latex;
};

const char *index_letter(int k) {
    static const char *L[] = {"i", "j", "k", "l", "m", "n", "p", "q"};
    return k < 8 ? L[k] : "z";
}

void symbol_rec(const TreeView &tv, int v, int parent_letter, int &next_letter, bool post,
                SymbolPieces &out) {
    auto kids = tv.kids[v];
    std::sort(kids.begin(), kids.end(), [&](int a, int b) {
        return subtree_key(tv.f, a, tv.kids) < subtree_key(tv.f, b, tv.kids);
    });
    const std::string bar = post ? "̄" : ""; // combining macron
    const std::string lbar_open = post ? "\\overline{" : "";
    const std::string lbar_close = post ? "}" : "";
    for (int c : kids) {
        const Node &nd = tv.f.nodes[c];
        if (nd.kind == NodeKind::grafted) {
            out.name += (post ? "pd" : "d") + std::to_string(nd.channel);
            out.pretty += " d" + bar + "_" + index_letter(parent_letter);
            out.latex += " " + lbar_open + "d" + lbar_close + "_" + index_letter(parent_letter);
            if (nd.channel > 1) {
                out.pretty += "^(" + std::to_string(nd.channel) + ")";
                out.latex += "^{(" + std::to_string(nd.channel) + ")}";
            }
        } else {
            bool white = nd.kind == NodeKind::white;
            std::string hat = white ? "̂" : "";
            std::string lhat_open = white ? "\\widehat{" : "";
            std::string lhat_close = white ? "}" : "";
            if (tv.kids[c].empty()) {
                out.name += white ? (post ? "pah" : "ah") : (post ? "pa" : "a");
                out.pretty += " c" + hat + bar + "_" + index_letter(parent_letter);
                out.latex += " " + lbar_open + lhat_open + "c" + lhat_close + lbar_close + "_" +
                             index_letter(parent_letter);
            } else {
                int mine = next_letter++;
                out.name += white ? (post ? "pah(" : "ah(") : (post ? "pa(" : "a(");
                out.pretty += " a" + hat + bar + "_" + index_letter(parent_letter) +
                              index_letter(mine);
                out.latex += " " + lbar_open + lhat_open + "a" + lhat_close + lbar_close + "_{" +
                             std::string(index_letter(parent_letter)) + index_letter(mine) + "}";
                SymbolPieces inner;
                symbol_rec(tv, c, mine, next_letter, post, inner);
                out.name += inner.name + ")";
                out.pretty += inner.pretty;
                out.latex += inner.latex;
            }
        }
        if (c != kids.back())
            out.name += ",";
    }
}

SymbolPieces weight_symbol_pieces(const Forest &tree, WeightSlot slot) {
    TreeView tv(tree);
    bool post = slot == WeightSlot::postprocessor;
    bool white = tv.f.nodes[tv.root].kind == NodeKind::white;
    SymbolPieces out;
    const std::string bar = post ? "̄" : "";
    const std::string hat = white ? "̂" : "";
    out.name = std::string(post ? "p" : "") + (white ? "bh" : "b");
    out.pretty = "Σ b" + hat + bar + "_i";
    out.latex = std::string("\\sum ") + (post ? "\\overline{" : "") + (white ? "\\widehat{b}" : "b") +
                (post ? "}" : "") + "_i";
    SymbolPieces args;
    int next_letter = 1;
    symbol_rec(tv, tv.root, 0, next_letter, post, args);
    if (!args.name.empty()) {
        out.name += "(" + args.name + ")";
        out.pretty += args.pretty;
        out.latex += args.latex;
    }
    return out;
}

} // namespace

Coefficient weight_symbol(const Forest &tree, WeightSlot slot) {
    auto p = weight_symbol_pieces(canonicalize(tree), slot);
    int id = Generators::instance().intern(p.name, p.pretty, p.latex);
    return Coefficient::generator(id);
}

Rational tree_symmetry(const Forest &tree) {
    TreeView tv(tree);
    Rational sym = 1;
    for (int v = 0; v < tree.size(); ++v) {
        std::map<std::string, int> mult;
        for (int c : tv.kids[v])
            ++mult[subtree_key(tree, c, tv.kids)];
        for (const auto &[k, m] : mult)
            for (int i = 2; i <= m; ++i)
                sym *= i;
    }
    return sym;
}

Coefficient elementary_weight(const StageSet &stages, const Forest &tree, bool symbolic,
                              WeightSlot slot) {
    TreeView tv(tree); // validates shape
    if (symbolic)
        return weight_symbol(tree, slot);

    const Tableau &t = stages.tableau;
    auto matrix_for = [&](NodeKind k) -> const std::vector<std::vector<Coefficient>> & {
        if (k == NodeKind::white) {
            if (!stages.partition)
                throw ShapeError("white node without a partition tableau");
            return stages.partition->A;
        }
        return t.A;
    };
    std::function<std::vector<Coefficient>(int)> psi = [&](int v) {
        std::vector<Coefficient> out(t.s);
        if (tree.nodes[v].kind == NodeKind::grafted) {
            int ch = tree.nodes[v].channel;
            if (ch < 1 || ch > t.channels())
                throw ShapeError("grafted channel out of range");
            for (int i = 0; i < t.s; ++i)
                out[i] = t.d[i][ch - 1];
            return out;
        }
        std::vector<std::vector<Coefficient>> kid_psi;
        for (int c : tv.kids[v])
            kid_psi.push_back(psi(c));
        const auto &M = matrix_for(tree.nodes[v].kind);
        for (int i = 0; i < t.s; ++i) {
            Coefficient acc;
            for (int j = 0; j < t.s; ++j) {
                Coefficient prod = M[i][j];
                for (const auto &kp : kid_psi)
                    prod *= kp[j];
                acc += prod;
            }
            out[i] = acc;
        }
        return out;
    };

    const auto &B = tree.nodes[tv.root].kind == NodeKind::white
                        ? (stages.partition ? stages.partition->b
                                            : throw ShapeError("white root without partition"))
                        : t.b;
    std::vector<std::vector<Coefficient>> kid_psi;
    for (int c : tv.kids[tv.root])
        kid_psi.push_back(psi(c));
    Coefficient acc;
    for (int i = 0; i < t.s; ++i) {
        Coefficient prod = B[i];
        for (const auto &kp : kid_psi)
            prod *= kp[i];
        acc += prod;
    }
    return acc;
}

// -- tree enumeration -----------------------------------------------------------

std::vector<Forest> weight_trees(int max_grade2, bool whites, int channels) {
    // items[g] = all subtree shapes of grade2 g (grafted leaf has grade2 1)
    std::vector<std::vector<Forest>> items(max_grade2 + 1);
    if (max_grade2 >= 1)
        for (int ch = 1; ch <= channels; ++ch) {
            Forest leaf;
            leaf.add(grafted_node(ch));
            // standalone grafted node is not a valid Forest (needs out-edge);
            // stored raw here, only ever attached below
            items[1].push_back(leaf);
        }

    std::vector<Forest> all_trees;
    for (int g = 2; g <= max_grade2; ++g) {
        // choose a child multiset of total grade g-2
        std::vector<std::pair<int, const Forest *>> pool;
        for (int gg = 1; gg <= g - 2; ++gg)
            for (const auto &f : items[gg])
                pool.emplace_back(gg, &f);
        std::vector<const Forest *> chosen;
        std::function<void(int, size_t)> rec = [&](int left, size_t from) {
            if (left == 0) {
                for (int color = 0; color < (whites ? 2 : 1); ++color) {
                    Forest tree;
                    tree.add(color ? white_node() : plain_node());
                    for (const Forest *c : chosen) {
                        int off = tree.size();
                        for (const auto &nd : c->nodes)
                            tree.nodes.push_back(nd);
                        for (const auto &e : c->edges)
                            tree.edges.push_back({e[0] + off, e[1] + off});
                        // child root = first node of the stored subtree
                        tree.add_edge(off, 0);
                    }
                    items[g].push_back(tree);
                    all_trees.push_back(tree);
                }
                return;
            }
            for (size_t s = from; s < pool.size(); ++s)
                if (pool[s].first <= left) {
                    chosen.push_back(pool[s].second);
                    rec(left - pool[s].first, s);
                    chosen.pop_back();
                }
        };
        rec(g - 2, 0);
    }
    return all_trees;
}

// -- phi-composition --------------------------------------------------------------

namespace {

struct StateItem {
    Forest tree; // stored with its own node order; node 0 is the subtree root
    Coefficient coeff;
    int g2;
};

Series compose_phi(const std::vector<StateItem> &items, int cutoff2) {
    Series out(cutoff2);
    std::vector<std::pair<const StateItem *, int>> chosen; // item, multiplicity
    std::function<void(size_t, int)> rec = [&](size_t idx, int budget) {
        // emit current multiset
        Forest f = bare_root();
        Coefficient coeff(1);
        for (const auto &[item, m] : chosen) {
            Rational mfact = 1;
            for (int i = 2; i <= m; ++i)
                mfact *= i;
            for (int rep = 0; rep < m; ++rep) {
                int off = f.size();
                for (const auto &nd : item->tree.nodes)
                    f.nodes.push_back(nd);
                for (const auto &e : item->tree.edges)
                    f.edges.push_back({e[0] + off, e[1] + off});
                f.add_edge(off, 0);
                coeff *= item->coeff;
            }
            coeff *= Coefficient(Rational(1) / mfact);
        }
        out.add(f, coeff);

        for (size_t i = idx; i < items.size(); ++i) {
            if (items[i].g2 > budget || items[i].coeff.is_zero())
                continue;
            chosen.emplace_back(&items[i], 1);
            int b = budget - items[i].g2;
            while (true) {
                rec(i + 1, b);
                if (b < items[i].g2)
                    break;
                b -= items[i].g2;
                ++chosen.back().second;
            }
            chosen.pop_back();
        }
    };
    rec(0, cutoff2);
    return out;
}

std::vector<StateItem> state_items(int cutoff2, bool whites, int channels,
                                   const std::vector<Coefficient> &update_noise,
                                   int channel_offset,
                                   const std::function<Coefficient(const Forest &)> &weight) {
    std::vector<StateItem> items;
    for (int ch = 1; ch <= channels; ++ch) {
        Coefficient u = ch <= static_cast<int>(update_noise.size()) ? update_noise[ch - 1]
                                                                    : Coefficient(0);
        if (u.is_zero())
            continue;
        Forest leaf;
        leaf.add(grafted_node(ch + channel_offset));
        items.push_back({leaf, u * Coefficient::sigma_power(1), 1});
    }
    for (const auto &tree : weight_trees(cutoff2, whites, channels)) {
        Coefficient w = weight(tree);
        if (w.is_zero())
            continue;
        int crosses = 0;
        for (const auto &nd : tree.nodes)
            crosses += (nd.kind == NodeKind::grafted);
        Coefficient coeff = w * Coefficient::sigma_power(crosses) *
                            Coefficient(Rational(1) / tree_symmetry(tree));
        Forest shifted = tree;
        for (auto &nd : shifted.nodes)
            if (nd.kind == NodeKind::grafted)
                nd.channel += channel_offset;
        // weight_trees stores the root at node 0 by construction
        items.push_back({shifted, coeff, grade2(tree)});
    }
    return items;
}

} // namespace

Series expand_grafted(const StageSet &stages, int channel_offset, int cutoff2, bool symbolic,
                      WeightSlot slot) {
    if (cutoff2 > 8)
        throw CutoffTooLarge("expansion supports grade2 cutoff <= 8");
    bool whites = stages.partition.has_value();
    auto items = state_items(cutoff2, whites, stages.tableau.channels(),
                             stages.tableau.update_noise, channel_offset,
                             [&](const Forest &t) {
                                 return elementary_weight(stages, t, symbolic, slot);
                             });
    return compose_phi(items, cutoff2);
}

Series expand_grafted(const Scheme &s, int cutoff2, bool symbolic) {
    s.check_shape();
    return expand_grafted(s.main, 0, cutoff2, symbolic, WeightSlot::main);
}

Series expand_postprocessor_grafted(const Scheme &s, int cutoff2, bool symbolic) {
    if (!s.postprocessor)
        throw ShapeError("scheme has no postprocessor");
    return expand_grafted(*s.postprocessor, s.main.tableau.channels(), cutoff2, symbolic,
                          WeightSlot::postprocessor);
}

Series expand_grafted_symbolic(const SymbolicClass &cls, int cutoff2, WeightSlot slot) {
    if (cutoff2 > 8)
        throw CutoffTooLarge("expansion supports grade2 cutoff <= 8");
    bool post = slot == WeightSlot::postprocessor;
    bool whites = post ? cls.post_partitioned : cls.partitioned;
    std::vector<Coefficient> noise = post ? cls.post_update_noise : cls.update_noise;
    int offset = post ? cls.channels : 0;
    int channels = post ? std::max<int>(1, static_cast<int>(noise.size())) : cls.channels;
    if (post && noise.empty())
        noise = {Coefficient::generator(Generators::instance().intern(
            "pd0", "d̄_0", "\\overline{d}_0"))};
    auto items = state_items(cutoff2, whites, channels, noise, offset,
                             [&](const Forest &t) { return weight_symbol(t, slot); });
    return compose_phi(items, cutoff2);
}

std::vector<Series> operator_expansion_of(const Series &grafted, int max_j) {
    std::vector<Series> out;
    for (int j = 0; j <= max_j; ++j)
        out.push_back(expectation(grafted.graded_part(2 * j + 2)));
    return out;
}

std::vector<Series> operator_expansion(const Scheme &s, int max_j, bool symbolic) {
    if (2 * (max_j + 1) > 8)
        throw CutoffTooLarge("operator expansion supports A_j up to j = 3");
    return operator_expansion_of(expand_grafted(s, 2 * (max_j + 1), symbolic), max_j);
}

} // namespace xbs
