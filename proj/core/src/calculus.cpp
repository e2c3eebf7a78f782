#include "xbs/calculus.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace xbs {

std::vector<std::vector<std::pair<int, int>>> pair_partitions(int two_n) {
    std::vector<std::vector<std::pair<int, int>>> out;
    if (two_n % 2 != 0)
        return out;
    std::vector<int> items(two_n);
    for (int i = 0; i < two_n; ++i)
        items[i] = i;
    std::vector<std::pair<int, int>> cur;
    std::function<void(std::vector<int> &)> rec = [&](std::vector<int> &rest) {
        if (rest.empty()) {
            out.push_back(cur);
            return;
        }
        int a = rest.front();
        for (size_t j = 1; j < rest.size(); ++j) {
            int b = rest[j];
            std::vector<int> next;
            for (size_t k = 1; k < rest.size(); ++k)
                if (k != j)
                    next.push_back(rest[k]);
            cur.emplace_back(a, b);
            rec(next);
            cur.pop_back();
        }
    };
    rec(items);
    return out;
}

namespace {

Forest drop_nodes(const Forest &f, const std::vector<int> &victims,
                  const std::vector<std::array<int, 2>> &extra_lianas) {
    std::vector<int> remap(f.size(), -1);
    Forest g;
    for (int v = 0; v < f.size(); ++v) {
        if (std::find(victims.begin(), victims.end(), v) != victims.end())
            continue;
        remap[v] = g.add(f.nodes[v]);
    }
    auto alive = [&](int v) { return remap[v] >= 0; };
    for (const auto &e : f.edges)
        if (alive(e[0]) && alive(e[1]))
            g.add_edge(remap[e[0]], remap[e[1]]);
    for (const auto &l : f.lianas)
        if (alive(l[0]) && alive(l[1]))
            g.add_liana(remap[l[0]], remap[l[1]]);
    for (const auto &l : extra_lianas)
        g.add_liana(remap[l[0]], remap[l[1]]);
    return g;
}

} // namespace

Series expectation(const Series &s) {
    Series out(s.cutoff2());
    for (const auto &[f, c] : s.terms()) {
        std::map<int, std::vector<int>> by_channel;
        for (int v = 0; v < f.size(); ++v)
            if (f.nodes[v].kind == NodeKind::grafted)
                by_channel[f.nodes[v].channel].push_back(v);
        bool odd = false;
        for (const auto &[ch, vs] : by_channel)
            odd |= (vs.size() % 2 != 0);
        if (odd)
            continue;

        auto parent_of = [&](int v) {
            for (const auto &e : f.edges)
                if (e[0] == v)
                    return e[1];
            throw InvalidForest("grafted node without parent");
        };

        // cartesian product of per-channel pairings
        std::vector<std::vector<std::vector<std::pair<int, int>>>> channel_pairings;
        std::vector<std::vector<int>> channel_nodes;
        for (const auto &[ch, vs] : by_channel) {
            channel_pairings.push_back(pair_partitions(static_cast<int>(vs.size())));
            channel_nodes.push_back(vs);
        }
        std::vector<int> victims;
        for (const auto &[ch, vs] : by_channel)
            victims.insert(victims.end(), vs.begin(), vs.end());

        std::vector<std::array<int, 2>> lianas;
        std::function<void(size_t)> rec = [&](size_t ci) {
            if (ci == channel_pairings.size()) {
                out.add(drop_nodes(f, victims, lianas), c);
                return;
            }
            for (const auto &pairing : channel_pairings[ci]) {
                size_t base = lianas.size();
                for (const auto &[i, j] : pairing) {
                    int u = parent_of(channel_nodes[ci][i]);
                    int v = parent_of(channel_nodes[ci][j]);
                    lianas.push_back({u, v});
                }
                rec(ci + 1);
                lianas.resize(base);
            }
        };
        rec(0);
    }
    return out;
}

Series compose(const Series &outer, const Series &inner) {
    int cutoff = std::min(outer.cutoff2(), inner.cutoff2());
    Series out(cutoff);
    for (const auto &[fo, co] : outer.terms()) {
        for (int v = 0; v < fo.size(); ++v)
            if (fo.nodes[v].kind == NodeKind::grafted)
                throw ShapeError("compose requires grafted-free series");
        auto ro = fo.root();
        if (!ro)
            throw ShapeError("compose requires rooted outer forests");
        for (const auto &[fi, ci] : inner.terms()) {
            auto ri = fi.root();
            if (!ri)
                throw ShapeError("compose requires rooted inner forests");
            if (grade2(fo) + grade2(fi) > cutoff)
                continue;
            Coefficient cc = co * ci;
            if (cc.is_zero())
                continue;

            // connections at the outer root: incoming edges and liana endpoints
            std::vector<int> edge_ids;
            for (size_t e = 0; e < fo.edges.size(); ++e)
                if (fo.edges[e][1] == *ro)
                    edge_ids.push_back(static_cast<int>(e));
            std::vector<std::pair<int, int>> liana_ends; // (liana id, endpoint)
            for (size_t l = 0; l < fo.lianas.size(); ++l) {
                if (fo.lianas[l][0] == *ro)
                    liana_ends.emplace_back(static_cast<int>(l), 0);
                if (fo.lianas[l][1] == *ro)
                    liana_ends.emplace_back(static_cast<int>(l), 1);
            }

            const int k = static_cast<int>(edge_ids.size() + liana_ends.size());
            const int n_inner = fi.size();
            std::vector<int> choice(k, 0);
            while (true) {
                // build composite for this assignment
                Forest g;
                std::vector<int> map_i(fi.size()), map_o(fo.size(), -1);
                for (int v = 0; v < fi.size(); ++v)
                    map_i[v] = g.add(fi.nodes[v]);
                for (int v = 0; v < fo.size(); ++v) {
                    if (v == *ro)
                        continue;
                    Node nd = fo.nodes[v];
                    map_o[v] = g.add(nd);
                }
                for (const auto &e : fi.edges)
                    g.add_edge(map_i[e[0]], map_i[e[1]]);
                for (const auto &l : fi.lianas)
                    g.add_liana(map_i[l[0]], map_i[l[1]]);
                int slot = 0;
                for (const auto &e : fo.edges) {
                    if (e[1] == *ro) {
                        int target = choice[slot++];
                        g.add_edge(map_o[e[0]], map_i[target]);
                    } else
                        g.add_edge(map_o[e[0]], map_o[e[1]]);
                }
                for (size_t l = 0; l < fo.lianas.size(); ++l) {
                    int a = fo.lianas[l][0], b = fo.lianas[l][1];
                    int na, nb;
                    if (a == *ro && b == *ro) {
                        na = map_i[choice[slot++]];
                        nb = map_i[choice[slot++]];
                    } else if (a == *ro) {
                        na = map_i[choice[slot++]];
                        nb = map_o[b];
                    } else if (b == *ro) {
                        na = map_o[a];
                        nb = map_i[choice[slot++]];
                    } else {
                        na = map_o[a];
                        nb = map_o[b];
                    }
                    g.add_liana(na, nb);
                }
                out.add(g, cc);

                int i = 0;
                for (; i < k; ++i) {
                    if (++choice[i] < n_inner)
                        break;
                    choice[i] = 0;
                }
                if (i == k)
                    break;
            }
        }
    }
    return out;
}

Series generator(bool partitioned) {
    Series s(Series::unbounded);
    s.add(chain(1), Coefficient(1));
    if (partitioned)
        s.add(chain(1, {NodeKind::white}), Coefficient(1));
    s.add(root_with_self_lianas(1), Coefficient(Rational(1, 2)) * sigma2());
    return s;
}

Series generator_power(int k, int cutoff2, bool partitioned) {
    if (k < 1)
        throw Error("generator_power needs k >= 1");
    if (2 * k > cutoff2)
        throw CutoffTooLarge("generator_power: k exceeds cutoff");
    Series L = generator(partitioned).truncated(cutoff2);
    Series acc = L;
    for (int i = 1; i < k; ++i)
        acc = compose(L, acc);
    return acc;
}

Series lie_bracket(const Series &a, const Series &b) {
    return compose(a, b) - compose(b, a);
}

} // namespace xbs
