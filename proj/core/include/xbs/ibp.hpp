#pragma once
#include "xbs/series.hpp"

namespace xbs {

/// What is known about the drift: nothing, f = -grad V, both partitioned
/// drifts gradients, f = f1 + f2 with div(f2 exp(-2V/sigma^2)) = 0, or
/// additionally f2 = J grad V.
enum class Assumption {
    general,
    gradient_f,
    partitioned_gradients,
    non_reversible,
    non_reversible_j,
};

Assumption assumption_from_string(const std::string &s);
std::string to_string(Assumption a);

struct Connection {
    bool is_liana = false;
    int index = 0;    // position in the forest's edge or liana list
    int endpoint = 0; // liana endpoint (0 or 1)
};

/// One integration by parts against the invariant density: the chosen root
/// connection is unplugged and reattached to every non-root, non-grafted node
/// and to one fresh square; every target carries a factor -1.
Series ibp_step(const Forest &f, const Connection &c);

/// Reduction order: lianas before edges, lowest index first, on the canonical
/// labelling.
Connection first_connection(const Forest &f);

/// Pointwise simplification rules to a fixed point: derivative/component
/// exchange at gradient nodes (orbit-minimal representative), square
/// elimination via grad g = (2/sigma^2) f, and the divergence-free rules for
/// the perturbed drift. Branches into two colours under partitioned
/// gradients, hence a series.
Series gradient_rewrite_series(const Forest &f, Assumption a);

/// Single-output form of the rewrite; throws ShapeError when it branches.
std::pair<Forest, Coefficient> gradient_rewrite(const Forest &f, Assumption a);

/// Normal form modulo integration by parts: unprotected rooted forests end at
/// root degree one (rewrites applied); square/aroma residues are re-expressed
/// through the protected forests whenever they lie in their span. Protected
/// forests pass through untouched.
Series reduce(const Series &s, Assumption a, const std::vector<Forest> &protected_set = {});

/// reduce with an empty protected set, empty iff the integral of the series
/// against the invariant density vanishes for every test function.
std::pair<bool, Series> equivalent_zero(const Series &s, Assumption a);

/// True for single-tree forests of root degree one without squares; these are
/// the residual basis the order conditions are read from.
bool is_clean_basis_forest(const Forest &f);

} // namespace xbs
