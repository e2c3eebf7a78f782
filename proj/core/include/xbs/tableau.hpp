#pragma once
#include <optional>
#include <vector>

#include "xbs/coefficient.hpp"

namespace xbs {

/// Runge-Kutta data. Entries are Coefficients so schemes can carry exact
/// rationals, doubles (irrational tableaus) or free symbols like theta.
/// c is always recomputed from row sums, never stored.
struct Tableau {
    int s = 0;
    std::vector<std::vector<Coefficient>> A; // s x s
    std::vector<Coefficient> b;              // s
    std::vector<std::vector<Coefficient>> d; // s x channels
    std::vector<Coefficient> update_noise;   // per channel; defaults (1, 0, ...)

    int channels() const { return static_cast<int>(update_noise.size()); }
    std::vector<Coefficient> c() const;
    void check_shape() const; // throws ShapeError
    bool exact() const;
};

/// Second coefficient set applied to the white drift; stages and d are shared
/// with the main tableau.
struct Partition {
    std::vector<std::vector<Coefficient>> A;
    std::vector<Coefficient> b;
};

struct StageSet {
    Tableau tableau;
    std::optional<Partition> partition;
    bool exact() const;
};

struct Scheme {
    StageSet main;
    std::optional<StageSet> postprocessor; // update_noise[0] plays d0
    std::string id;

    bool exact() const;
    void check_shape() const;
};

/// theta in [0,1] as a free symbol or a number; stage 1 is the current point,
/// stage 2 the (implicit) endpoint.
Scheme theta_method(const Coefficient &theta);
Scheme euler_maruyama();
/// Implicit order-2 scheme with noise-shifted argument and one-stage
/// postprocessor; entries are irrational, so the scheme runs in double mode.
Scheme postprocessed_implicit_example();
/// Partitioned two-drift scheme of order 2 with a pure-noise postprocessor.
Scheme partitioned_example();
/// Perturbed-drift scheme of order 2 (f = f1 + f2, div-free weighted f2).
Scheme non_reversible_example();

} // namespace xbs
