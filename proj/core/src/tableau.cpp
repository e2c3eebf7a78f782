#include "xbs/tableau.hpp"

#include <cmath>

namespace xbs {

std::vector<Coefficient> Tableau::c() const {
    std::vector<Coefficient> out(s);
    for (int i = 0; i < s; ++i) {
        Coefficient acc;
        for (int j = 0; j < s; ++j)
            acc += A[i][j];
        out[i] = acc;
    }
    return out;
}

void Tableau::check_shape() const {
    if (static_cast<int>(A.size()) != s || static_cast<int>(b.size()) != s ||
        static_cast<int>(d.size()) != s)
        throw ShapeError("tableau arrays do not match stage count");
    for (const auto &row : A)
        if (static_cast<int>(row.size()) != s)
            throw ShapeError("A is not square");
    const size_t L = update_noise.size();
    if (L == 0)
        throw ShapeError("tableau needs at least one noise channel");
    for (const auto &row : d)
        if (row.size() != L)
            throw ShapeError("d rows do not match channel count");
}

bool Tableau::exact() const {
    auto all = [](const std::vector<Coefficient> &v) {
        for (const auto &c : v)
            if (!c.exact())
                return false;
        return true;
    };
    for (const auto &row : A)
        if (!all(row))
            return false;
    for (const auto &row : d)
        if (!all(row))
            return false;
    return all(b) && all(update_noise);
}

bool StageSet::exact() const {
    if (!tableau.exact())
        return false;
    if (partition) {
        for (const auto &row : partition->A)
            for (const auto &c : row)
                if (!c.exact())
                    return false;
        for (const auto &c : partition->b)
            if (!c.exact())
                return false;
    }
    return true;
}

bool Scheme::exact() const {
    return main.exact() && (!postprocessor || postprocessor->exact());
}

void Scheme::check_shape() const {
    main.tableau.check_shape();
    if (main.partition) {
        if (static_cast<int>(main.partition->A.size()) != main.tableau.s ||
            static_cast<int>(main.partition->b.size()) != main.tableau.s)
            throw ShapeError("partition arrays do not match stage count");
        for (const auto &row : main.partition->A)
            if (static_cast<int>(row.size()) != main.tableau.s)
                throw ShapeError("partition A is not square");
    }
    if (postprocessor)
        postprocessor->tableau.check_shape();
}

namespace {
Coefficient q(long long num, long long den = 1) { return Coefficient(Rational(num, den)); }
Coefficient dd(double v) { return Coefficient(Number::inexact(v)); }
} // namespace

Scheme theta_method(const Coefficient &theta) {
    Coefficient one_m = Coefficient(1) - theta;
    Tableau t;
    t.s = 2;
    t.A = {{q(0), q(0)}, {one_m, theta}};
    t.b = {one_m, theta};
    t.d = {{q(0)}, {q(1)}};
    t.update_noise = {q(1)};
    Scheme s;
    s.main.tableau = t;
    s.id = "theta-method";
    return s;
}

Scheme euler_maruyama() {
    Tableau t;
    t.s = 1;
    t.A = {{q(0)}};
    t.b = {q(1)};
    t.d = {{q(0)}};
    t.update_noise = {q(1)};
    Scheme s;
    s.main.tableau = t;
    s.id = "euler-maruyama";
    return s;
}

Scheme postprocessed_implicit_example() {
    const double r2 = std::sqrt(2.0);
    Tableau t;
    t.s = 1;
    t.A = {{dd(1.0)}};
    t.b = {dd(1.0)};
    t.d = {{dd((1.0 + r2) / 2.0)}};
    t.update_noise = {dd(1.0)};

    Tableau p;
    p.s = 1;
    p.A = {{dd(r2 / 2.0)}};
    p.b = {dd(r2 / 2.0)};
    p.d = {{dd(std::sqrt(4.0 * r2 - 1.0) / 2.0)}};
    p.update_noise = {dd(std::sqrt(4.0 * r2 - 1.0) / 2.0)};

    Scheme s;
    s.main.tableau = t;
    s.postprocessor = StageSet{p, std::nullopt};
    s.id = "postprocessed-implicit";
    return s;
}

Scheme partitioned_example() {
    Tableau t;
    t.s = 3;
    t.A = {{q(0), q(0), q(0)}, {q(0), q(1, 2), q(1, 2)}, {q(0), q(1, 2), q(1, 2)}};
    t.b = {q(0), q(1, 2), q(1, 2)};
    t.d = {{q(1, 2)}, {q(1, 2)}, {q(3, 2)}};
    t.update_noise = {q(1)};
    Partition p;
    p.A = {{q(0), q(0), q(0)}, {q(1), q(0), q(0)}, {q(1), q(0), q(0)}};
    p.b = {q(1), q(0), q(0)};

    Tableau post; // no stages, pure noise shift
    post.s = 0;
    post.A = {};
    post.b = {};
    post.d = {};
    post.update_noise = {q(1, 2)};

    Scheme s;
    s.main = StageSet{t, p};
    s.postprocessor = StageSet{post, std::nullopt};
    s.id = "partitioned-brehier";
    return s;
}

Scheme non_reversible_example() {
    Tableau t;
    t.s = 2;
    t.A = {{q(0), q(0)}, {q(0), q(0)}};
    t.b = {q(1), q(0)};
    t.d = {{q(1, 2)}, {q(-1, 2)}};
    t.update_noise = {q(1)};
    Partition p;
    p.A = {{q(0), q(0)}, {q(-2), q(0)}};
    p.b = {q(5, 4), q(-1, 4)};

    Tableau post;
    post.s = 0;
    post.A = {};
    post.b = {};
    post.d = {};
    post.update_noise = {q(1, 2)};

    Scheme s;
    s.main = StageSet{t, p};
    s.postprocessor = StageSet{post, std::nullopt};
    s.id = "non-reversible-perturbation";
    return s;
}

} // namespace xbs
