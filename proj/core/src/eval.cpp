#include "xbs/eval.hpp"

#include "xbs/coefficient.hpp"

#include <algorithm>
#include <functional>

namespace xbs {

ForestEvaluator::ForestEvaluator(const Forest &f, const PolySpec &data,
                                 const Rational &sigma_squared, bool root_is_drift)
    : dim_(data.dim), root_is_drift_(root_is_drift) {
    require_valid(f);
    auto r = f.root();
    if (!r)
        throw ShapeError("evaluation needs a rooted forest");
    root_ = *r;

    const int n = f.size();
    nodes_.resize(n);
    base_.resize(n);
    std::vector<Polynomial> drift, white;
    bool need_drift = false, need_white = false, need_g = false;
    for (int v = 0; v < n; ++v) {
        need_drift |= f.nodes[v].kind == NodeKind::plain || (root_is_drift && v == root_);
        need_white |= f.nodes[v].kind == NodeKind::white;
        need_g |= f.nodes[v].kind == NodeKind::square;
    }
    if (need_drift)
        drift = data.drift();
    if (need_white)
        white = data.white_drift();
    Polynomial g;
    if (need_g)
        g = data.log_density_sq(sigma_squared);

    // slots: one per non-root non-square node (component), one per liana
    for (int v = 0; v < n; ++v) {
        NodeData nd;
        nd.kind = f.nodes[v].kind;
        nd.channel = f.nodes[v].channel;
        if (v != root_ && nd.kind != NodeKind::square)
            nd.own_slot = n_slots_++;
        nodes_[v] = nd;
    }
    for (const auto &e : f.edges)
        nodes_[e[1]].in_slots.push_back(nodes_[e[0]].own_slot);
    std::vector<int> liana_slot(f.lianas.size());
    for (size_t l = 0; l < f.lianas.size(); ++l) {
        liana_slot[l] = n_slots_++;
        nodes_[f.lianas[l][0]].in_slots.push_back(liana_slot[l]);
        nodes_[f.lianas[l][1]].in_slots.push_back(liana_slot[l]);
    }

    for (int v = 0; v < n; ++v) {
        switch (nodes_[v].kind) {
        case NodeKind::root:
            base_[v] = root_is_drift ? drift : std::vector<Polynomial>{data.phi};
            break;
        case NodeKind::plain:
            base_[v] = drift;
            break;
        case NodeKind::white:
            base_[v] = white;
            break;
        case NodeKind::square:
            base_[v] = {g};
            break;
        case NodeKind::grafted:
            base_[v] = {}; // xi factor, no polynomial
            break;
        }
        if (nodes_[v].kind != NodeKind::grafted && base_[v].empty())
            throw MissingPotential("missing data for node kind");
    }
}

const Polynomial &ForestEvaluator::deriv(int key, const std::vector<int> &counts) const {
    std::lock_guard lock(cache_mu_);
    auto it = deriv_cache_.find({key, counts});
    if (it != deriv_cache_.end())
        return it->second;
    // key encodes node * max_components + component
    int node = key / (dim_ + 1);
    int comp = key % (dim_ + 1);
    Polynomial p = base_[node].at(comp);
    for (int var = 0; var < dim_; ++var)
        for (int k = 0; k < counts[var]; ++k)
            p = p.derivative(var);
    return deriv_cache_.emplace(std::make_pair(key, counts), std::move(p)).first->second;
}

Rational ForestEvaluator::eval_assignment(const std::vector<int> &slot_value, int out_component,
                                          const std::vector<Rational> &x,
                                          const std::map<int, std::vector<Rational>> &xi) const {
    Rational prod = 1;
    for (size_t v = 0; v < nodes_.size(); ++v) {
        const NodeData &nd = nodes_[v];
        if (nd.kind == NodeKind::grafted) {
            auto it = xi.find(nd.channel);
            if (it == xi.end())
                throw DimensionMismatch("missing xi values for channel " +
                                        std::to_string(nd.channel));
            prod *= it->second.at(slot_value[nd.own_slot]);
            continue;
        }
        std::vector<int> counts(dim_, 0);
        for (int s : nd.in_slots)
            ++counts[slot_value[s]];
        int comp = 0;
        if (static_cast<int>(v) == root_)
            comp = root_is_drift_ ? out_component : 0;
        else if (nd.kind == NodeKind::square)
            comp = 0;
        else
            comp = slot_value[nd.own_slot];
        const Polynomial &p = deriv(static_cast<int>(v) * (dim_ + 1) + comp, counts);
        if (p.is_zero())
            return Rational(0);
        prod *= p.eval(x);
        if (prod.is_zero())
            return prod;
    }
    return prod;
}

Rational ForestEvaluator::eval(const std::vector<Rational> &x,
                               const std::map<int, std::vector<Rational>> &xi) const {
    if (static_cast<int>(x.size()) != dim_)
        throw DimensionMismatch("point dimension mismatch");
    Rational acc = 0;
    std::vector<int> slot(n_slots_, 0);
    while (true) {
        acc += eval_assignment(slot, 0, x, xi);
        int i = 0;
        for (; i < n_slots_; ++i) {
            if (++slot[i] < dim_)
                break;
            slot[i] = 0;
        }
        if (i == n_slots_)
            break;
        if (n_slots_ == 0)
            break;
    }
    return acc;
}

std::vector<Rational> ForestEvaluator::eval_vector(const std::vector<Rational> &x) const {
    std::vector<Rational> out(dim_, Rational(0));
    for (int comp = 0; comp < dim_; ++comp) {
        std::vector<int> slot(n_slots_, 0);
        while (true) {
            out[comp] += eval_assignment(slot, comp, x, {});
            int i = 0;
            for (; i < n_slots_; ++i) {
                if (++slot[i] < dim_)
                    break;
                slot[i] = 0;
            }
            if (i == n_slots_ || n_slots_ == 0)
                break;
        }
    }
    return out;
}

double ForestEvaluator::eval_double(const std::vector<double> &x) const {
    double acc = 0;
    std::vector<int> slot(n_slots_, 0);
    while (true) {
        double prod = 1;
        for (size_t v = 0; v < nodes_.size() && prod != 0.0; ++v) {
            const NodeData &nd = nodes_[v];
            if (nd.kind == NodeKind::grafted)
                throw ShapeError("double evaluation requires grafted-free forests");
            std::vector<int> counts(dim_, 0);
            for (int s : nd.in_slots)
                ++counts[slot[s]];
            int comp = static_cast<int>(v) == root_ || nd.kind == NodeKind::square
                           ? 0
                           : slot[nd.own_slot];
            prod *= deriv(static_cast<int>(v) * (dim_ + 1) + comp, counts).eval_double(x);
        }
        acc += prod;
        int i = 0;
        for (; i < n_slots_; ++i) {
            if (++slot[i] < dim_)
                break;
            slot[i] = 0;
        }
        if (i == n_slots_ || n_slots_ == 0)
            break;
    }
    return acc;
}

Rational eval_forest(const Forest &f, const PolySpec &data, const Rational &sigma,
                     const std::vector<Rational> &x,
                     const std::map<int, std::vector<Rational>> &xi) {
    return ForestEvaluator(f, data, sigma * sigma).eval(x, xi);
}

Rational gaussian_expectation_oracle(const Forest &f, const PolySpec &data,
                                     const Rational &sigma, const std::vector<Rational> &x) {
    require_valid(f);
    // expand in the xi coordinates: sum over all index assignments, collecting
    // a monomial exponent per (channel, coordinate)
    std::map<int, int> graft_count;
    for (const auto &nd : f.nodes)
        if (nd.kind == NodeKind::grafted)
            ++graft_count[nd.channel];

    // assignment loop with the grafted factors kept symbolic: collect a
    // monomial exponent per (channel, coordinate) and apply moments at the end
    (void)sigma;
    const int dim = data.dim;
    auto root = f.root();
    if (!root)
        throw ShapeError("expectation oracle needs a rooted forest");

    std::vector<int> own_slot(f.size(), -1);
    int n_slots = 0;
    for (int v = 0; v < f.size(); ++v)
        if (v != *root && f.nodes[v].kind != NodeKind::square)
            own_slot[v] = n_slots++;
    std::vector<std::vector<int>> in_slots(f.size());
    for (const auto &e : f.edges)
        in_slots[e[1]].push_back(own_slot[e[0]]);
    std::vector<int> liana_slot(f.lianas.size());
    for (size_t l = 0; l < f.lianas.size(); ++l) {
        liana_slot[l] = n_slots++;
        in_slots[f.lianas[l][0]].push_back(liana_slot[l]);
        in_slots[f.lianas[l][1]].push_back(liana_slot[l]);
    }

    std::vector<Polynomial> drift, white;
    bool any_plain = false, any_white = false;
    for (const auto &nd : f.nodes) {
        any_plain |= nd.kind == NodeKind::plain;
        any_white |= nd.kind == NodeKind::white;
    }
    if (any_plain)
        drift = data.drift();
    if (any_white)
        white = data.white_drift();

    std::map<std::map<std::pair<int, int>, int>, Rational> by_monomial;
    std::vector<int> slot(n_slots, 0);
    std::map<std::pair<std::pair<int, int>, std::vector<int>>, Polynomial> dcache;
    auto derivative_of = [&](const Polynomial &p, const std::vector<int> &counts, int node,
                             int comp) -> const Polynomial & {
        auto key = std::make_pair(std::make_pair(node, comp), counts);
        auto it = dcache.find(key);
        if (it != dcache.end())
            return it->second;
        Polynomial q = p;
        for (int var = 0; var < dim; ++var)
            for (int k = 0; k < counts[var]; ++k)
                q = q.derivative(var);
        return dcache.emplace(key, std::move(q)).first->second;
    };

    while (true) {
        Rational prod = 1;
        std::map<std::pair<int, int>, int> mono;
        for (int v = 0; v < f.size() && !prod.is_zero(); ++v) {
            const Node &nd = f.nodes[v];
            if (nd.kind == NodeKind::grafted) {
                ++mono[{nd.channel, slot[own_slot[v]]}];
                continue;
            }
            std::vector<int> counts(dim, 0);
            for (int s : in_slots[v])
                ++counts[slot[s]];
            const Polynomial *basep = nullptr;
            int comp = 0;
            if (v == *root)
                basep = &data.phi;
            else if (nd.kind == NodeKind::square)
                throw ShapeError("expectation oracle does not handle squares");
            else {
                comp = slot[own_slot[v]];
                basep = nd.kind == NodeKind::plain ? &drift.at(comp) : &white.at(comp);
            }
            prod *= derivative_of(*basep, counts, v, comp).eval(x);
        }
        if (!prod.is_zero())
            by_monomial[mono] += prod;

        int i = 0;
        for (; i < n_slots; ++i) {
            if (++slot[i] < dim)
                break;
            slot[i] = 0;
        }
        if (i == n_slots || n_slots == 0)
            break;
    }

    Rational acc = 0;
    for (const auto &[mono, c] : by_monomial) {
        Rational moment = 1;
        bool odd = false;
        for (const auto &[key, k] : mono) {
            if (k % 2 != 0) {
                odd = true;
                break;
            }
            for (int m = k - 1; m >= 1; m -= 2)
                moment *= m; // (k-1)!!
        }
        if (!odd)
            acc += c * moment;
    }
    return acc;
}

Rational eval_series(const Series &s, const PolySpec &data, const Rational &sigma,
                     const std::vector<Rational> &x,
                     const std::map<int, std::vector<Rational>> &xi) {
    Rational acc = 0;
    std::map<int, Coefficient> sig{{Generators::instance().sigma(), Coefficient(sigma)}};
    for (const auto &[f, c] : s.terms()) {
        Coefficient cs = c.substitute(sig);
        acc += cs.constant_value().rational() * eval_forest(f, data, sigma, x, xi);
    }
    return acc;
}

Polynomial differential_polynomial(const Forest &f, const PolySpec &data, const Rational &sigma) {
    require_valid(f);
    auto root = f.root();
    if (!root)
        throw ShapeError("differential_polynomial needs a rooted forest");
    const int dim = data.dim;

    std::vector<int> own_slot(f.size(), -1);
    int n_slots = 0;
    for (int v = 0; v < f.size(); ++v) {
        if (f.nodes[v].kind == NodeKind::grafted)
            throw ShapeError("differential_polynomial requires grafted-free forests");
        if (v != *root && f.nodes[v].kind != NodeKind::square)
            own_slot[v] = n_slots++;
    }
    std::vector<std::vector<int>> in_slots(f.size());
    for (const auto &e : f.edges)
        in_slots[e[1]].push_back(own_slot[e[0]]);
    for (size_t l = 0; l < f.lianas.size(); ++l) {
        int s = n_slots++;
        in_slots[f.lianas[l][0]].push_back(s);
        in_slots[f.lianas[l][1]].push_back(s);
    }

    std::vector<Polynomial> drift, white;
    Polynomial g;
    for (const auto &nd : f.nodes) {
        if (nd.kind == NodeKind::plain && drift.empty())
            drift = data.drift();
        if (nd.kind == NodeKind::white && white.empty())
            white = data.white_drift();
        if (nd.kind == NodeKind::square && g.is_zero())
            g = data.log_density_sq(sigma * sigma);
    }

    Polynomial acc(dim);
    std::vector<int> slot(n_slots, 0);
    while (true) {
        Polynomial prod(dim, Rational(1));
        for (int v = 0; v < f.size() && !prod.is_zero(); ++v) {
            const Node &nd = f.nodes[v];
            Polynomial p(dim);
            if (v == *root)
                p = data.phi;
            else if (nd.kind == NodeKind::square)
                p = g;
            else
                p = (nd.kind == NodeKind::plain ? drift : white).at(slot[own_slot[v]]);
            for (int s : in_slots[v])
                p = p.derivative(slot[s]);
            prod = prod * p;
        }
        acc += prod;
        int i = 0;
        for (; i < n_slots; ++i) {
            if (++slot[i] < dim)
                break;
            slot[i] = 0;
        }
        if (i == n_slots || n_slots == 0)
            break;
    }
    return acc;
}

std::vector<Rational> equivariance_residual(const Forest &f,
                                            const std::vector<Polynomial> &field,
                                            const std::vector<std::vector<Rational>> &A,
                                            const std::vector<Rational> &shift,
                                            const std::vector<Rational> &x) {
    const int d = static_cast<int>(field.size());
    if (static_cast<int>(A.size()) != d || static_cast<int>(x.size()) != d)
        throw DimensionMismatch("equivariance check dimensions disagree");
    auto Ainv = matrix_inverse(A);
    // (A*f)(x) = A f(A^{-1}(x - b))
    std::vector<Rational> c(d, Rational(0));
    for (int i = 0; i < d; ++i) {
        c[i] = 0;
        for (int j = 0; j < d; ++j)
            c[i] -= Ainv[i][j] * shift[j];
    }
    std::vector<Polynomial> composed(d, Polynomial(d));
    for (int j = 0; j < d; ++j)
        composed[j] = field[j].substitute_affine(Ainv, c);
    std::vector<Polynomial> transformed(d, Polynomial(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            transformed[i] += composed[j].scaled(A[i][j]);

    PolySpec lhs_data;
    lhs_data.dim = d;
    lhs_data.f = transformed;
    PolySpec rhs_data;
    rhs_data.dim = d;
    rhs_data.f = field;

    ForestEvaluator lhs_ev(f, lhs_data, 1, true);
    ForestEvaluator rhs_ev(f, rhs_data, 1, true);

    std::vector<Rational> lhs = lhs_ev.eval_vector(x);
    std::vector<Rational> y(d, Rational(0));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j)
            y[i] += Ainv[i][j] * (x[j] - shift[j]);
    }
    std::vector<Rational> rv = rhs_ev.eval_vector(y);
    std::vector<Rational> out(d, Rational(0));
    for (int i = 0; i < d; ++i) {
        Rational av = 0;
        for (int j = 0; j < d; ++j)
            av += A[i][j] * rv[j];
        out[i] = lhs[i] - av;
    }
    return out;
}

} // namespace xbs
