#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xbs/errors.hpp"

namespace xbs {

/// Node colours. The root stands for the test function, plain/white nodes for
/// the two drift fields, squares for derivatives of the log-density, and
/// grafted nodes for one component of a standard normal vector on a given
/// noise channel.
enum class NodeKind : std::uint8_t { root, plain, white, square, grafted };

struct Node {
    NodeKind kind = NodeKind::plain;
    int channel = -1; // grafted nodes only
    friend bool operator==(const Node &, const Node &) = default;
};

inline Node root_node() { return {NodeKind::root, -1}; }
inline Node plain_node() { return {NodeKind::plain, -1}; }
inline Node white_node() { return {NodeKind::white, -1}; }
inline Node square_node() { return {NodeKind::square, -1}; }
inline Node grafted_node(int channel = 1) { return {NodeKind::grafted, channel}; }

/// A labelled multigraph: directed edges (from, to) mean "from's component
/// index differentiates to's function"; lianas are undirected index
/// contractions, stored as a multiset of normalized pairs (self pairs allowed).
struct Forest {
    std::vector<Node> nodes;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> lianas;

    int size() const { return static_cast<int>(nodes.size()); }

    int add(Node n) {
        nodes.push_back(n);
        return size() - 1;
    }
    void add_edge(int from, int to) { edges.push_back({from, to}); }
    void add_liana(int a, int b) {
        if (a > b)
            std::swap(a, b);
        lianas.push_back({a, b});
    }

    std::optional<int> root() const;
    int out_degree(int v) const;
    /// Incoming edges + liana endpoints at v (self-lianas count twice).
    int connection_degree(int v) const;
    std::vector<int> count_kinds() const; // indexed by NodeKind

    friend bool operator==(const Forest &a, const Forest &b) {
        return a.nodes == b.nodes && a.edges == b.edges && a.lianas == b.lianas;
    }
};

/// Checks every structural rule; violations are data, not failures.
std::vector<std::string> validate(const Forest &f);
void require_valid(const Forest &f); // throws InvalidForest

/// Doubled grading so the half-integer contribution of grafted nodes stays
/// integral: grade2 = 2*(#plain + #white) + 2*#lianas + #grafted.
/// Squares contribute nothing, which keeps integration by parts grade-neutral.
int grade2(const Forest &f);

struct CanonicalKey {
    std::vector<std::int32_t> data;
    friend auto operator<=>(const CanonicalKey &, const CanonicalKey &) = default;
};

/// Deterministic representative of the isomorphism class (node relabelling
/// preserving kinds, edge directions and the liana multiset). Idempotent.
Forest canonicalize(const Forest &f);
CanonicalKey canonical_key(const Forest &f); // key of canonicalize(f)
bool is_canonical(const Forest &f);

/// Ordering for canonical forests: by grade, then encoding.
struct ForestLess {
    bool operator()(const Forest &a, const Forest &b) const;
};

bool isomorphic(const Forest &a, const Forest &b);

/// Brute-force isomorphism check by kind-respecting permutation search.
/// Test oracle for canonicalize; forests beyond ~9 nodes get slow.
bool isomorphic_brute_force(const Forest &a, const Forest &b);

// -- enumeration ------------------------------------------------------------

struct EnumerateOptions {
    bool lianas = false;
    bool aromas = false; // components without the root
    int max_nodes = 16;
};

/// All canonical rooted forests of grade2 <= max_grade2 whose nodes use only
/// the given kinds (the root is always included), sorted by (grade, key).
/// Grafted channels run over 1..channels when NodeKind::grafted is allowed.
std::vector<Forest> enumerate_forests(int max_grade2, const std::vector<NodeKind> &kinds,
                                      const EnumerateOptions &opts = {}, int channels = 1);

// -- rendering ---------------------------------------------------------------

/// Human-readable tensor expression, e.g. "φ'(f'(f))", "φ'(Δf)",
/// "div(f)·φ'(f)". Stable for a given canonical forest.
std::string render_differential(const Forest &f);

namespace detail {
/// ASCII-only variant, safe for generator names and plain terminals.
std::string render_ascii(const Forest &f);
} // namespace detail

// -- small builders used across tests and tables -----------------------------

Forest bare_root();
/// Chain root <- f <- f ... with n drift nodes.
Forest chain(int n_drift, const std::vector<NodeKind> &kinds = {});
Forest root_with_self_lianas(int n); // Lap^n phi
Forest root_with_crosses(int n, int channel = 1);

} // namespace xbs
