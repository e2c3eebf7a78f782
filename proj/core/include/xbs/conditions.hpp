#pragma once
#include <optional>

#include "xbs/expand.hpp"
#include "xbs/ibp.hpp"

namespace xbs {

struct Equation {
    Coefficient lhs; // polynomial in weight symbols, constants folded left; rhs is 0
    Forest provenance;
    int order = 1;
    std::string label; // "consistency", "order 2", "postprocessor-shape", ...
    std::string pretty(bool latex = false) const;
};

struct ConditionSet {
    Assumption assumption = Assumption::gradient_f;
    int order = 1;
    bool weak = false;
    std::vector<Equation> equations;
    bool inconsistent = false;
    std::string inconsistency_note;

    std::vector<const Equation *> at_order(int ord) const;
};

/// Symbolic families the derivations run over. Postprocessor weights are part
/// of the postprocessed kinds; plain schemes substitute them to zero.
enum class SchemeClassKind {
    rk,
    rk_postprocessed,
    partitioned_postprocessed,
    generic,
    generic_postprocessed,
};

struct SchemeClass {
    SchemeClassKind kind = SchemeClassKind::rk;
    int channels = 1;
};

/// Conditions for order p of the invariant measure (order p+1 when the class
/// carries a postprocessor: the top object is then A_p + [L, Abar_p]).
/// protected_override replaces the natural protected forests.
ConditionSet invariant_measure_conditions(const SchemeClass &cls, int p, Assumption a,
                                          const std::vector<Forest> *protected_override = nullptr);

/// Coefficient-wise comparison of A_{i-1} with L^i / i!, i <= p; under the
/// gradient assumption, forests identified by the symmetry rewrites merge
/// into combined conditions.
ConditionSet weak_order_conditions(const SchemeClass &cls, int p, Assumption a);

struct OrderReport {
    std::string scheme_id;
    int invariant_measure_order = 0;
    int weak_order = 0;
    bool exact_arithmetic = true;
    double tolerance = 0.0;
    bool assuming_ergodicity = true; // the theorems' standing hypothesis
    std::vector<std::string> failing_invariant_measure;
    std::vector<std::string> failing_weak;
};

/// Largest orders (up to p_max <= 3) whose condition sets the numeric scheme
/// satisfies, exactly or within 1e-12 in double mode.
OrderReport check_tableau(const Scheme &s, Assumption a, int p_max);

/// Numeric values of all weight symbols of the scheme, for substitution into
/// symbolic condition sets.
std::map<int, Coefficient> numeric_weight_map(const Scheme &s, int max_grade2);

enum class TableId {
    RK_IM,
    RK_WEAK_L2,
    POSTPROCESSED_GENERAL_2,
    POSTPROCESSED_GENERAL_3,
    RK_POSTPROCESSED,
    PARTITIONED,
    NONREVERSIBLE,
    GAMMA0,
    GAMMA1,
    GAMMA2,
};

TableId table_id_from_string(const std::string &s);
std::string to_string(TableId id);

struct TableResult {
    std::optional<ConditionSet> conditions;
    std::optional<Series> series; // the gamma displays
};

/// Derives the table through the expansion/reduction pipeline, with the
/// natural protected forests.
TableResult reproduce_table(TableId id);

/// Root-degree >= 2 trees kept unreduced: the cherry at grade 2; the triple
/// cherry, the cherry with a laplacian child and the cherry with a chain arm
/// at grade 3. All colourings when whites is set.
std::vector<Forest> natural_protected(int g2, bool whites);

std::optional<Equation> make_equation(Coefficient lhs, const Forest &prov, int order,
                                      std::string label);

/// Free B-series coefficient symbol a(gamma) (abar for the postprocessor).
Coefficient generic_symbol(const Forest &f, bool postprocessor);

} // namespace xbs
