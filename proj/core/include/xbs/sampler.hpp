#pragma once
#include <cstdint>

#include "xbs/polynomial.hpp"
#include "xbs/quadrature.hpp"
#include "xbs/tableau.hpp"

namespace xbs {

/// Counter-based normal generator: every draw is keyed by
/// (seed, chain, step, channel, component), so streams are reproducible and
/// splittable across threads.
struct CounterRng {
    std::uint64_t seed = 0;
    double normal(std::uint64_t chain, std::uint64_t step, std::uint32_t channel,
                  std::uint32_t component) const;
};

struct MCSpec {
    Scheme scheme;
    PolySpec data;
    Rational sigma2 = 1; // exact sigma^2
    std::vector<double> step_sizes;
    long long steps = 100000; // per chain
    double burn_in = 0.1;
    int chains = 8;
    std::uint64_t seed = 12345;
    std::vector<double> start; // defaults to the origin
    int threads = 0;           // 0: hardware
    void validate() const;
};

struct McEstimate {
    double h;
    double mean;
    double stderr_mean; // across chains
};

struct SlopeReport {
    std::vector<McEstimate> estimates;
    std::vector<double> bias;
    std::vector<bool> usable; // |bias| >= 3 stderr
    double reference = 0;
    double slope = 0;
    double slope_stderr = 0;
};

/// Ergodic averages of phi for each step size; the postprocessed state is
/// what gets recorded (never fed back), the main chain is unaffected.
std::vector<McEstimate> simulate(const MCSpec &m);

/// Least-squares fit of log|bias| against log h, weighted by the delta-method
/// errors; noise-dominated points are flagged and skipped.
SlopeReport order_study(const MCSpec &m, const QuadratureSpec &q);

/// One step of the scheme from state x; implicit stage systems are solved by
/// damped Newton on the exact polynomial Jacobian to 1e-13.
std::vector<double> scheme_step(const Scheme &s, const PolySpec &data, double sigma, double h,
                                const std::vector<double> &x,
                                const CounterRng &rng, std::uint64_t chain, std::uint64_t step);

std::vector<double> postprocess_state(const Scheme &s, const PolySpec &data, double sigma,
                                      double h, const std::vector<double> &x,
                                      const CounterRng &rng, std::uint64_t chain,
                                      std::uint64_t step);

} // namespace xbs
