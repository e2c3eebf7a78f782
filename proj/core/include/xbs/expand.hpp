#pragma once
#include "xbs/series.hpp"
#include "xbs/tableau.hpp"

namespace xbs {

enum class WeightSlot { main, postprocessor };

/// Drift-rooted grafted trees up to a grade bound: the index set of
/// elementary weights. Channels run over 1..channels.
std::vector<Forest> weight_trees(int max_grade2, bool whites, int channels);

/// Stage sum of a drift-rooted grafted tree over the given stage set.
/// Symbolic mode interns and returns the weight-symbol generator instead.
/// ShapeError when the tree has a phi root, lianas or squares.
Coefficient elementary_weight(const StageSet &stages, const Forest &tree, bool symbolic,
                              WeightSlot slot = WeightSlot::main);

Coefficient weight_symbol(const Forest &tree, WeightSlot slot);

/// Product over nodes of factorials of identical-child multiplicities.
Rational tree_symmetry(const Forest &tree);

/// Symbolic scheme class for deriving order conditions: elementary weights
/// stay opaque generators.
struct SymbolicClass {
    bool partitioned = false;
    int channels = 1;
    std::vector<Coefficient> update_noise{Coefficient(1)};
    bool post = false;
    bool post_partitioned = false;
    std::vector<Coefficient> post_update_noise{}; // defaults to the pd0 symbol
};

/// Taylor series of phi(X1) before taking expectations: a series over grafted
/// forests; the bare root carries coefficient 1, every grafted node one sigma.
Series expand_grafted(const Scheme &s, int cutoff2, bool symbolic = false);

/// Same for the postprocessed output map.
Series expand_postprocessor_grafted(const Scheme &s, int cutoff2, bool symbolic = false);

Series expand_grafted_symbolic(const SymbolicClass &cls, int cutoff2,
                               WeightSlot slot = WeightSlot::main);

/// E[phi(X1)] = phi + h A_0 phi + h^2 A_1 phi + ...; returns [A_0 .. A_max_j].
std::vector<Series> operator_expansion(const Scheme &s, int max_j, bool symbolic = false);
std::vector<Series> operator_expansion_of(const Series &grafted, int max_j);

} // namespace xbs
