#pragma once
#include "xbs/eval.hpp"

namespace xbs {

/// Composite Gauss-Legendre rule on [-half_width, half_width]^dim.
struct QuadratureSpec {
    int dim = 1;
    double half_width = 6.0;
    int nodes_per_axis = 128; // >= 8
};

/// Normalized integral of F(gamma)(phi) against the invariant density
/// Z exp(-2V/sigma^2), parameterized by exact sigma^2; doubling the node
/// count must move the result by less than 1e-10 or NonConvergence is thrown.
double ibp_integral(const Forest &f, const PolySpec &data, const Rational &sigma_squared,
                    const QuadratureSpec &q);

/// Same for a whole series (sigma substituted into the coefficients).
double series_integral(const Series &s, const PolySpec &data, const Rational &sigma_squared,
                       const QuadratureSpec &q);

/// Quadrature reference for the invariant average of phi.
double exact_average(const PolySpec &data, const Rational &sigma_squared,
                     const QuadratureSpec &q);

} // namespace xbs
