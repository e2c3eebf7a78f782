#include "xbs/forest.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace xbs {

namespace {

struct Renderer {
    const Forest &f;
    bool ascii;
    bool has_white;
    std::map<int, std::string> liana_letter; // liana index -> summation letter
    std::vector<int> self_lianas;            // per node
    std::vector<std::vector<int>> cross_lianas; // per node, liana ids
    std::vector<std::vector<int>> children;     // per node, predecessor nodes
    std::vector<bool> in_cycle;

    explicit Renderer(const Forest &fr, bool asc) : f(fr), ascii(asc) {
        has_white = false;
        for (const auto &n : f.nodes)
            has_white |= (n.kind == NodeKind::white);
        const int n = f.size();
        self_lianas.assign(n, 0);
        cross_lianas.assign(n, {});
        children.assign(n, {});
        in_cycle.assign(n, false);
        static const char *letters[] = {"i", "j", "k", "l", "m", "n", "p", "q", "r", "s"};
        int next_letter = 0;
        for (size_t li = 0; li < f.lianas.size(); ++li) {
            auto [a, b] = std::pair(f.lianas[li][0], f.lianas[li][1]);
            if (a == b)
                ++self_lianas[a];
            else {
                liana_letter[static_cast<int>(li)] =
                    next_letter < 10 ? letters[next_letter] : "i" + std::to_string(next_letter);
                ++next_letter;
                cross_lianas[a].push_back(static_cast<int>(li));
                cross_lianas[b].push_back(static_cast<int>(li));
            }
        }
        for (const auto &e : f.edges)
            if (e[0] != e[1])
                children[e[1]].push_back(e[0]);
        // mark directed cycles (loop edges and longer ones)
        for (int v = 0; v < n; ++v) {
            int u = v;
            for (int steps = 0; steps <= n; ++steps) {
                int next = -1;
                for (const auto &e : f.edges)
                    if (e[0] == u)
                        next = e[1];
                if (next == -1)
                    break;
                u = next;
                if (u == v) {
                    in_cycle[v] = true;
                    break;
                }
            }
        }
    }

    std::string sym(const char *uni, const char *asc) const { return ascii ? asc : uni; }

    std::string base_name(int v) const {
        switch (f.nodes[v].kind) {
        case NodeKind::root:
            return sym("φ", "phi"); // phi
        case NodeKind::plain:
            return has_white ? "f1" : "f";
        case NodeKind::white:
            return "f2";
        case NodeKind::square:
            return "g";
        case NodeKind::grafted: {
            int ch = f.nodes[v].channel;
            std::string x = sym("ξ", "xi");
            return ch > 1 ? x + std::to_string(ch) : x;
        }
        }
        return "?";
    }

    std::string primes(size_t k) const {
        if (k == 0)
            return "";
        if (k <= 3)
            return std::string(k, '\'');
        return "^(" + std::to_string(k) + ")";
    }

    std::string expr(int v) const {
        std::vector<std::string> args;
        auto kids = children[v];
        std::sort(kids.begin(), kids.end(), [&](int a, int b) { return expr(a) < expr(b); });
        for (int c : kids)
            args.push_back(expr(c));
        for (int li : cross_lianas[v])
            args.push_back("e_" + liana_letter.at(li));
        std::string head = base_name(v);
        for (int s = 0; s < self_lianas[v]; ++s)
            head = sym("Δ", "Lap") + (ascii ? std::string(" ") : std::string()) + head;
        if (self_lianas[v] > 0 && !args.empty())
            head = "(" + head + ")";
        if (args.empty())
            return head;
        std::string out = head + primes(args.size()) + "(";
        for (size_t i = 0; i < args.size(); ++i)
            out += (i ? "," : "") + args[i];
        return out + ")";
    }

    // explicit index notation for components with cycles
    std::string index_component(const std::vector<int> &comp) const {
        std::map<int, std::string> node_letter;
        static const char *nl[] = {"a", "b", "c", "d", "u", "v", "w"};
        int k = 0;
        for (int v : comp)
            node_letter[v] = k < 7 ? nl[k++] : "a" + std::to_string(k++);
        std::string out = sym("Σ", "Sum") + "[";
        bool first = true;
        for (int v : comp) {
            std::vector<std::string> subs;
            for (const auto &e : f.edges)
                if (e[1] == v)
                    subs.push_back(node_letter.at(e[0]));
            for (size_t li = 0; li < f.lianas.size(); ++li) {
                if (f.lianas[li][0] == v && f.lianas[li][1] == v) {
                    // keep paired letter for the self contraction
                    subs.push_back("s" + std::to_string(li));
                    subs.push_back("s" + std::to_string(li));
                } else if (f.lianas[li][0] == v || f.lianas[li][1] == v)
                    subs.push_back(liana_letter.at(static_cast<int>(li)));
            }
            if (!first)
                out += " ";
            first = false;
            out += sym("∂", "d") + "_{";
            for (size_t i = 0; i < subs.size(); ++i)
                out += (i ? "," : "") + subs[i];
            out += "}" + base_name(v) + "_" + node_letter.at(v);
        }
        return out + "]";
    }

    std::string component(const std::vector<int> &comp) const {
        for (int v : comp)
            if (in_cycle[v]) {
                // lone divergence aroma reads nicer
                if (comp.size() == 1 && self_lianas[comp[0]] == 0 &&
                    cross_lianas[comp[0]].empty() && children[comp[0]].empty())
                    return "div(" + base_name(comp[0]) + ")";
                return index_component(comp);
            }
        int sink = -1;
        for (int v : comp)
            if (f.out_degree(v) == 0)
                sink = v;
        return expr(sink);
    }
};

} // namespace

static std::string render_impl(const Forest &f, bool ascii) {
    require_valid(f);
    Renderer r(f, ascii);

    // edge-connected components
    const int n = f.size();
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
            for (const auto &e : f.edges)
                for (int w : {e[0], e[1]})
                    if ((e[0] == u || e[1] == u) && comp[w] == -1) {
                        comp[w] = nc;
                        stack.push_back(w);
                    }
        }
        ++nc;
    }
    std::vector<std::vector<int>> comps(nc);
    for (int v = 0; v < n; ++v)
        comps[comp[v]].push_back(v);

    auto root = f.root();
    std::vector<std::string> parts;
    std::string root_part;
    for (const auto &c : comps) {
        std::string s = r.component(c);
        bool is_root_comp = root && comp[*root] == comp[c[0]];
        if (is_root_comp)
            root_part = s;
        else
            parts.push_back(s);
    }
    std::sort(parts.begin(), parts.end());
    if (!root_part.empty())
        parts.push_back(root_part);

    std::string sums;
    for (const auto &[li, letter] : r.liana_letter)
        sums += letter;
    std::string out;
    if (!sums.empty())
        out += (ascii ? "Sum_" : "Σ_") + sums + " ";
    for (size_t i = 0; i < parts.size(); ++i)
        out += (i ? (ascii ? "*" : "·") : "") + parts[i];
    return out;
}

std::string render_differential(const Forest &f) { return render_impl(f, false); }

namespace detail {
std::string render_ascii(const Forest &f) { return render_impl(f, true); }
} // namespace detail

} // namespace xbs
