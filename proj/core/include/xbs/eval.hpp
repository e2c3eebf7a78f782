#pragma once
#include <map>
#include <mutex>

#include "xbs/forest.hpp"
#include "xbs/polynomial.hpp"
#include "xbs/series.hpp"

namespace xbs {

/// Exact evaluator for elementary differentials on polynomial data. Builds
/// the derivative tables once; eval loops over the full index summation.
class ForestEvaluator {
  public:
    /// root_is_drift reads the root as the drift field (vector values), the
    /// plain setting as the test function phi (scalar).
    ForestEvaluator(const Forest &f, const PolySpec &data, const Rational &sigma_squared,
                    bool root_is_drift = false);

    Rational eval(const std::vector<Rational> &x,
                  const std::map<int, std::vector<Rational>> &xi = {}) const;
    std::vector<Rational> eval_vector(const std::vector<Rational> &x) const;
    double eval_double(const std::vector<double> &x) const; // grafted-free only

  private:
    struct NodeData {
        NodeKind kind;
        int channel;
        std::vector<int> in_slots; // index slots differentiating this node
        int own_slot = -1;         // component slot (grafted/plain/white)
    };
    const Polynomial &deriv(int node, const std::vector<int> &counts) const;
    Rational eval_assignment(const std::vector<int> &slot_value, int out_component,
                             const std::vector<Rational> &x,
                             const std::map<int, std::vector<Rational>> &xi) const;

    int dim_;
    bool root_is_drift_;
    int root_ = -1;
    int n_slots_ = 0;
    std::vector<NodeData> nodes_;
    std::vector<std::vector<Polynomial>> base_; // node -> components (1 for scalar)
    mutable std::map<std::pair<int, std::vector<int>>, Polynomial> deriv_cache_;
    mutable std::mutex cache_mu_;
};

Rational eval_forest(const Forest &f, const PolySpec &data, const Rational &sigma,
                     const std::vector<Rational> &x,
                     const std::map<int, std::vector<Rational>> &xi = {});

/// Exact expectation over the grafted nodes through one-dimensional moments
/// E[xi^k] = (k-1)!! for even k, 0 otherwise; independent of any pairing
/// construction.
Rational gaussian_expectation_oracle(const Forest &f, const PolySpec &data,
                                     const Rational &sigma, const std::vector<Rational> &x);

/// Substituted-sigma evaluation of a whole series (exact).
Rational eval_series(const Series &s, const PolySpec &data, const Rational &sigma,
                     const std::vector<Rational> &x,
                     const std::map<int, std::vector<Rational>> &xi = {});

/// F(gamma)(phi) as an exact polynomial in x (grafted-free forests).
Polynomial differential_polynomial(const Forest &f, const PolySpec &data, const Rational &sigma);

/// F(gamma)((A,b)*f)(x) - A F(gamma)(f)(A^{-1}(x-b)), exact; zero for
/// orthogonal A.
std::vector<Rational> equivariance_residual(const Forest &f,
                                            const std::vector<Polynomial> &field,
                                            const std::vector<std::vector<Rational>> &A,
                                            const std::vector<Rational> &shift,
                                            const std::vector<Rational> &x);

} // namespace xbs
