#include "xbs/quadrature.hpp"

#include "xbs/coefficient.hpp"

#include <memory>

#include <cmath>
#include <functional>

namespace xbs {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_m
void gauss_legendre(int m, std::vector<double> &x, std::vector<double> &w) {
    x.resize(m);
    w.resize(m);
    for (int k = 0; k < (m + 1) / 2; ++k) {
        double t = std::cos(M_PI * (k + 0.75) / (m + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= m; ++j) {
                double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15)
                break;
        }
        x[m - 1 - k] = t;
        x[k] = -t;
        double wk = 2.0 / ((1.0 - t * t) * dp * dp);
        w[k] = w[m - 1 - k] = wk;
    }
}

struct Grid {
    std::vector<double> x, w;
};

// composite rule with 16-point panels; the node budget fixes the panel count
Grid axis_grid(double half_width, int nodes) {
    if (nodes < 8)
        throw NonConvergence("at least 8 nodes per axis are required");
    const int order = std::min(nodes, 64);
    const int panels = std::max(1, (nodes + order - 1) / order);
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);
    Grid g;
    double h = 2.0 * half_width / panels;
    for (int p = 0; p < panels; ++p) {
        double a = -half_width + p * h;
        for (int k = 0; k < order; ++k) {
            g.x.push_back(a + 0.5 * h * (gx[k] + 1.0));
            g.w.push_back(0.5 * h * gw[k]);
        }
    }
    return g;
}

// deterministic pairwise summation
double tree_sum(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    while (v.size() > 1) {
        std::vector<double> next;
        next.reserve((v.size() + 1) / 2);
        for (size_t i = 0; i + 1 < v.size(); i += 2)
            next.push_back(v[i] + v[i + 1]);
        if (v.size() % 2)
            next.push_back(v.back());
        v = std::move(next);
    }
    return v[0];
}

double integrate(int dim, const Grid &g, const std::function<double(const std::vector<double> &)> &fn) {
    std::vector<double> parts;
    std::vector<double> x(dim);
    if (dim == 1) {
        parts.reserve(g.x.size());
        for (size_t i = 0; i < g.x.size(); ++i) {
            x[0] = g.x[i];
            parts.push_back(g.w[i] * fn(x));
        }
    } else if (dim == 2) {
        parts.reserve(g.x.size() * g.x.size());
        for (size_t i = 0; i < g.x.size(); ++i)
            for (size_t j = 0; j < g.x.size(); ++j) {
                x[0] = g.x[i];
                x[1] = g.x[j];
                parts.push_back(g.w[i] * g.w[j] * fn(x));
            }
    } else {
        throw DimensionMismatch("quadrature supports dim 1 and 2");
    }
    return tree_sum(std::move(parts));
}

double normalized_integral(const PolySpec &data, const Rational &sigma_squared,
                           const QuadratureSpec &q,
                           const std::function<double(const std::vector<double> &)> &numerator) {
    if (!data.potential)
        throw MissingPotential("quadrature needs the potential");
    const Polynomial &V = *data.potential;
    const double s2 = static_cast<double>(sigma_squared);
    auto rho = [&](const std::vector<double> &x) { return std::exp(-2.0 * V.eval_double(x) / s2); };

    auto run = [&](int nodes) {
        Grid g = axis_grid(q.half_width, nodes);
        double num = integrate(q.dim, g, [&](const std::vector<double> &x) {
            return numerator(x) * rho(x);
        });
        double den = integrate(q.dim, g, rho);
        return num / den;
    };
    double v1 = run(q.nodes_per_axis);
    double v2 = run(2 * q.nodes_per_axis);
    if (std::abs(v1 - v2) > 1e-10 * std::max(1.0, std::abs(v2)))
        throw NonConvergence("quadrature did not settle under node doubling");
    return v2;
}

} // namespace

double ibp_integral(const Forest &f, const PolySpec &data, const Rational &sigma_squared,
                    const QuadratureSpec &q) {
    if (data.dim != q.dim)
        throw DimensionMismatch("quadrature dimension mismatch");
    ForestEvaluator ev(f, data, sigma_squared);
    return normalized_integral(data, sigma_squared, q,
                               [&](const std::vector<double> &x) { return ev.eval_double(x); });
}

double series_integral(const Series &s, const PolySpec &data, const Rational &sigma_squared,
                       const QuadratureSpec &q) {
    const double sig = std::sqrt(static_cast<double>(sigma_squared));
    std::vector<double> coeffs;
    std::vector<std::unique_ptr<ForestEvaluator>> evals;
    for (const auto &[f, c] : s.terms()) {
        double value = 0;
        for (const auto &[m, n] : c.terms()) {
            double t = n.to_double();
            for (const auto &[id, e] : m) {
                if (id != Generators::instance().sigma())
                    throw Error("series_integral needs sigma-only coefficients");
                t *= std::pow(sig, e);
            }
            value += t;
        }
        coeffs.push_back(value);
        evals.push_back(std::make_unique<ForestEvaluator>(f, data, sigma_squared));
    }
    return normalized_integral(data, sigma_squared, q, [&](const std::vector<double> &x) {
        double acc = 0;
        for (size_t i = 0; i < evals.size(); ++i)
            acc += coeffs[i] * evals[i]->eval_double(x);
        return acc;
    });
}

double exact_average(const PolySpec &data, const Rational &sigma_squared,
                     const QuadratureSpec &q) {
    return normalized_integral(data, sigma_squared, q, [&](const std::vector<double> &x) {
        return data.phi.eval_double(x);
    });
}

} // namespace xbs
