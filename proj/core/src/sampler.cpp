#include "xbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

namespace xbs {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double to_unit(std::uint64_t v) {
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

double CounterRng::normal(std::uint64_t chain, std::uint64_t step, std::uint32_t channel,
                          std::uint32_t component) const {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ chain);
    h = splitmix(h ^ step);
    h = splitmix(h ^ ((static_cast<std::uint64_t>(channel) << 32) | component));
    double u1 = to_unit(splitmix(h ^ 0x517cc1b727220a95ull));
    double u2 = to_unit(splitmix(h ^ 0x2545f4914f6cdd1dull));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

void MCSpec::validate() const {
    if (step_sizes.empty())
        throw ShapeError("no step sizes given");
    double hmin = *std::min_element(step_sizes.begin(), step_sizes.end());
    if (static_cast<double>(steps) * hmin < 100.0)
        throw ShapeError("steps * min(h) must reach the long-time regime (>= 100)");
    if (chains < 4)
        throw ShapeError("at least 4 chains are needed for error bars");
}

// -- compiled double-precision scheme ------------------------------------------------

namespace {

// polynomials flattened to double coefficients once; the stepper lives in the
// per-step hot loop
struct CompiledPoly {
    struct Term {
        double c;
        int e[4];
    };
    std::vector<Term> terms;
    int dim = 0;

    void build(const Polynomial &p, int d) {
        dim = d;
        terms.clear();
        for (const auto &[m, c] : p.terms()) {
            Term t{static_cast<double>(c), {0, 0, 0, 0}};
            for (int i = 0; i < d; ++i)
                t.e[i] = m[i];
            terms.push_back(t);
        }
    }
    double eval(const double *x) const {
        double acc = 0;
        for (const auto &t : terms) {
            double v = t.c;
            for (int i = 0; i < dim; ++i)
                for (int k = 0; k < t.e[i]; ++k)
                    v *= x[i];
            acc += v;
        }
        return acc;
    }
};

struct Field {
    std::vector<CompiledPoly> f;
    std::vector<std::vector<CompiledPoly>> jac;
    int dim;

    void build(const std::vector<Polynomial> &src) {
        dim = static_cast<int>(src.size());
        if (dim > 4)
            throw DimensionMismatch("sampling supports dimensions up to 4");
        f.resize(dim);
        jac.assign(dim, std::vector<CompiledPoly>(dim));
        for (int i = 0; i < dim; ++i) {
            f[i].build(src[i], dim);
            for (int j = 0; j < dim; ++j)
                jac[i][j].build(src[i].derivative(j), dim);
        }
    }
    void eval(const std::vector<double> &x, std::vector<double> &out) const {
        out.resize(dim);
        for (int i = 0; i < dim; ++i)
            out[i] = f[i].eval(x.data());
    }
};

double num(const Coefficient &c) { return c.constant_value().to_double(); }

struct CompiledStages {
    int s = 0, L = 1, dim = 1;
    std::vector<std::vector<double>> A, Ahat, d;
    std::vector<double> b, bhat, u;
    bool has_white = false;
    bool explicit_stages = true;

    void build(const StageSet &st, int dim_) {
        dim = dim_;
        s = st.tableau.s;
        L = st.tableau.channels();
        A.assign(s, std::vector<double>(s, 0.0));
        d.assign(s, std::vector<double>(L, 0.0));
        b.assign(s, 0.0);
        u.assign(L, 0.0);
        for (int i = 0; i < s; ++i) {
            b[i] = num(st.tableau.b[i]);
            for (int j = 0; j < s; ++j)
                A[i][j] = num(st.tableau.A[i][j]);
            for (int k = 0; k < L; ++k)
                d[i][k] = num(st.tableau.d[i][k]);
        }
        for (int k = 0; k < L; ++k)
            u[k] = num(st.tableau.update_noise[k]);
        if (st.partition) {
            has_white = true;
            Ahat.assign(s, std::vector<double>(s, 0.0));
            bhat.assign(s, 0.0);
            for (int i = 0; i < s; ++i) {
                bhat[i] = num(st.partition->b[i]);
                for (int j = 0; j < s; ++j)
                    Ahat[i][j] = num(st.partition->A[i][j]);
            }
        }
        explicit_stages = true;
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j) {
                if (A[i][j] != 0.0)
                    explicit_stages = false;
                if (has_white && Ahat[i][j] != 0.0)
                    explicit_stages = false;
            }
    }
};

void solve_dense(std::vector<std::vector<double>> &m, std::vector<double> &rhs) {
    const int n = static_cast<int>(m.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col]))
                piv = r;
        if (m[piv][col] == 0.0)
            throw NewtonDivergence("singular Newton system");
        std::swap(m[piv], m[col]);
        std::swap(rhs[piv], rhs[col]);
        for (int r = col + 1; r < n; ++r) {
            double f = m[r][col] / m[col][col];
            if (f == 0.0)
                continue;
            for (int c2 = col; c2 < n; ++c2)
                m[r][c2] -= f * m[col][c2];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        double v = rhs[col];
        for (int c2 = col + 1; c2 < n; ++c2)
            v -= m[col][c2] * rhs[c2];
        rhs[col] = v / m[col][col];
    }
}

struct Stepper {
    CompiledStages main, post;
    bool has_post = false;
    Field f1, f2;
    int dim;
    double sigma;

    Stepper(const Scheme &s, const PolySpec &data, double sig) : sigma(sig) {
        dim = data.dim;
        f1.build(data.drift());
        if (s.main.partition)
            f2.build(data.white_drift());
        main.build(s.main, dim);
        if (s.postprocessor) {
            has_post = true;
            post.build(*s.postprocessor, dim);
        }
    }

    // noise vector per channel for one step of one chain
    void noises(const CounterRng &rng, std::uint64_t chain, std::uint64_t step, int base,
                int L, double sqh, std::vector<std::vector<double>> &xi) const {
        xi.assign(L, std::vector<double>(dim));
        for (int k = 0; k < L; ++k)
            for (int c = 0; c < dim; ++c)
                xi[k][c] = sigma * sqh *
                           rng.normal(chain, step, static_cast<std::uint32_t>(base + k),
                                      static_cast<std::uint32_t>(c));
    }

    std::vector<std::vector<double>> stages(const CompiledStages &cs,
                                            const std::vector<double> &x, double h,
                                            const std::vector<std::vector<double>> &xi) const {
        const int s = cs.s, d = dim;
        std::vector<std::vector<double>> Y(s, x), F1(s), F2(s);
        std::vector<double> base_i(d);
        if (s == 0)
            return Y;
        auto stage_base = [&](int i, std::vector<double> &out) {
            out = x;
            for (int k = 0; k < cs.L; ++k)
                for (int c = 0; c < d; ++c)
                    out[c] += cs.d[i][k] * xi[k][c];
        };
        if (cs.explicit_stages) {
            for (int i = 0; i < s; ++i) {
                stage_base(i, Y[i]);
                for (int j = 0; j < i; ++j) {
                    for (int c = 0; c < d; ++c)
                        Y[i][c] += h * cs.A[i][j] * F1[j][c];
                    if (cs.has_white)
                        for (int c = 0; c < d; ++c)
                            Y[i][c] += h * cs.Ahat[i][j] * F2[j][c];
                }
                f1.eval(Y[i], F1[i]);
                if (cs.has_white)
                    f2.eval(Y[i], F2[i]);
            }
            return Y;
        }

        // damped Newton on the stacked stage system
        const int n = s * d;
        std::vector<double> G(n), delta(n);
        auto residual = [&](const std::vector<std::vector<double>> &Ys, std::vector<double> &g) {
            double norm = 0;
            for (int i = 0; i < s; ++i) {
                f1.eval(Ys[i], F1[i]);
                if (cs.has_white)
                    f2.eval(Ys[i], F2[i]);
            }
            for (int i = 0; i < s; ++i) {
                stage_base(i, base_i);
                for (int c = 0; c < d; ++c) {
                    double v = Ys[i][c] - base_i[c];
                    for (int j = 0; j < s; ++j) {
                        v -= h * cs.A[i][j] * F1[j][c];
                        if (cs.has_white)
                            v -= h * cs.Ahat[i][j] * F2[j][c];
                    }
                    g[i * d + c] = v;
                    norm = std::max(norm, std::abs(v));
                }
            }
            return norm;
        };
        double norm = residual(Y, G);
        for (int iter = 0; iter < 60 && norm > 1e-13; ++iter) {
            std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
            for (int i = 0; i < s; ++i)
                for (int c = 0; c < d; ++c) {
                    J[i * d + c][i * d + c] = 1.0;
                    for (int j = 0; j < s; ++j)
                        for (int e = 0; e < d; ++e) {
                            double jac = f1.jac[c][e].eval(Y[j].data());
                            double v = -h * cs.A[i][j] * jac;
                            if (cs.has_white)
                                v -= h * cs.Ahat[i][j] * f2.jac[c][e].eval(Y[j].data());
                            J[i * d + c][j * d + e] += v;
                        }
                }
            delta = G;
            solve_dense(J, delta);
            double lambda = 1.0;
            for (int tries = 0; tries < 30; ++tries) {
                std::vector<std::vector<double>> Yn = Y;
                for (int i = 0; i < s; ++i)
                    for (int c = 0; c < d; ++c)
                        Yn[i][c] -= lambda * delta[i * d + c];
                std::vector<double> Gn(n);
                double nn = residual(Yn, Gn);
                if (nn < norm || nn <= 1e-13) {
                    Y = std::move(Yn);
                    G = std::move(Gn);
                    norm = nn;
                    break;
                }
                lambda *= 0.5;
                if (tries == 29)
                    throw NewtonDivergence("stage solve stalled");
            }
        }
        if (norm > 1e-13) {
            // fixed-point fallback for small steps
            if (h <= 0.01) {
                for (int it = 0; it < 400 && norm > 1e-13; ++it) {
                    for (int i = 0; i < s; ++i) {
                        stage_base(i, Y[i]);
                        for (int j = 0; j < s; ++j) {
                            for (int c = 0; c < d; ++c)
                                Y[i][c] += h * cs.A[i][j] * F1[j][c];
                            if (cs.has_white)
                                for (int c = 0; c < d; ++c)
                                    Y[i][c] += h * cs.Ahat[i][j] * F2[j][c];
                        }
                    }
                    norm = residual(Y, G);
                }
            }
            if (norm > 1e-13)
                throw NewtonDivergence("stage residual above 1e-13");
        }
        return Y;
    }

    void step(std::vector<double> &x, double h, const CounterRng &rng, std::uint64_t chain,
              std::uint64_t n) const {
        double sqh = std::sqrt(h);
        std::vector<std::vector<double>> xi;
        noises(rng, chain, n, 0, main.L, sqh, xi);
        auto Y = stages(main, x, h, xi);
        std::vector<double> F(dim);
        std::vector<double> out = x;
        for (int i = 0; i < main.s; ++i) {
            f1.eval(Y[i], F);
            for (int c = 0; c < dim; ++c)
                out[c] += h * main.b[i] * F[c];
            if (main.has_white) {
                f2.eval(Y[i], F);
                for (int c = 0; c < dim; ++c)
                    out[c] += h * main.bhat[i] * F[c];
            }
        }
        for (int k = 0; k < main.L; ++k)
            for (int c = 0; c < dim; ++c)
                out[c] += main.u[k] * xi[k][c];
        x = std::move(out);
        double norm = 0;
        for (double v : x)
            norm = std::max(norm, std::abs(v));
        if (norm > 1e6)
            throw UnstableTrajectory("|X| exceeded 1e6");
    }

    std::vector<double> postprocessed(const std::vector<double> &x, double h,
                                      const CounterRng &rng, std::uint64_t chain,
                                      std::uint64_t n) const {
        if (!has_post)
            return x;
        double sqh = std::sqrt(h);
        std::vector<std::vector<double>> xi;
        noises(rng, chain, n, main.L, post.L, sqh, xi);
        auto Y = stages(post, x, h, xi);
        std::vector<double> F(dim);
        std::vector<double> out = x;
        for (int i = 0; i < post.s; ++i) {
            f1.eval(Y[i], F);
            for (int c = 0; c < dim; ++c)
                out[c] += h * post.b[i] * F[c];
            if (post.has_white) {
                f2.eval(Y[i], F);
                for (int c = 0; c < dim; ++c)
                    out[c] += h * post.bhat[i] * F[c];
            }
        }
        for (int k = 0; k < post.L; ++k)
            for (int c = 0; c < dim; ++c)
                out[c] += post.u[k] * xi[k][c];
        return out;
    }
};

double run_chain(const Stepper &st, const MCSpec &m, double h, int chain) {
    CounterRng rng{m.seed};
    std::vector<double> x = m.start;
    if (x.empty())
        x.assign(st.dim, 0.0);
    CompiledPoly phi;
    phi.build(m.data.phi, st.dim);
    const long long burn = static_cast<long long>(m.burn_in * static_cast<double>(m.steps));
    long double acc = 0;
    long long count = 0;
    for (long long n = 0; n < m.steps; ++n) {
        st.step(x, h, rng, static_cast<std::uint64_t>(chain), static_cast<std::uint64_t>(n));
        if (n >= burn) {
            auto xbar = st.postprocessed(x, h, rng, static_cast<std::uint64_t>(chain),
                                         static_cast<std::uint64_t>(n));
            acc += phi.eval(xbar.data());
            ++count;
        }
    }
    return static_cast<double>(acc / count);
}

int thread_budget(int requested) {
    if (requested > 0)
        return requested;
    if (const char *env = std::getenv("XBS_THREADS"))
        return std::max(1, std::atoi(env));
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace

std::vector<double> scheme_step(const Scheme &s, const PolySpec &data, double sigma, double h,
                                const std::vector<double> &x, const CounterRng &rng,
                                std::uint64_t chain, std::uint64_t step) {
    Stepper st(s, data, sigma);
    std::vector<double> y = x;
    st.step(y, h, rng, chain, step);
    return y;
}

std::vector<double> postprocess_state(const Scheme &s, const PolySpec &data, double sigma,
                                      double h, const std::vector<double> &x,
                                      const CounterRng &rng, std::uint64_t chain,
                                      std::uint64_t step) {
    Stepper st(s, data, sigma);
    return st.postprocessed(x, h, rng, chain, step);
}

std::vector<McEstimate> simulate(const MCSpec &m) {
    m.validate();
    Stepper st(m.scheme, m.data, std::sqrt(static_cast<double>(m.sigma2)));
    const int workers = thread_budget(m.threads);

    std::vector<McEstimate> out;
    for (double h : m.step_sizes) {
        std::vector<double> chain_means(m.chains);
        int next = 0;
        while (next < m.chains) {
            int batch = std::min(workers, m.chains - next);
            std::vector<std::future<double>> futs;
            for (int c = next; c < next + batch; ++c)
                futs.push_back(std::async(std::launch::async,
                                          [&st, &m, h, c] { return run_chain(st, m, h, c); }));
            for (int i = 0; i < batch; ++i)
                chain_means[next + i] = futs[i].get();
            next += batch;
        }
        double mean = 0;
        for (double v : chain_means)
            mean += v;
        mean /= m.chains;
        double var = 0;
        for (double v : chain_means)
            var += (v - mean) * (v - mean);
        var /= (m.chains - 1);
        out.push_back({h, mean, std::sqrt(var / m.chains)});
    }
    return out;
}

SlopeReport order_study(const MCSpec &m, const QuadratureSpec &q) {
    SlopeReport rep;
    rep.estimates = simulate(m);
    rep.reference = exact_average(m.data, m.sigma2, q);

    std::vector<double> xs, ys, ws;
    for (const auto &e : rep.estimates) {
        double bias = e.mean - rep.reference;
        rep.bias.push_back(bias);
        bool ok = std::abs(bias) >= 3.0 * e.stderr_mean;
        rep.usable.push_back(ok);
        if (ok) {
            xs.push_back(std::log(e.h));
            ys.push_back(std::log(std::abs(bias)));
            double rel = e.stderr_mean / std::abs(bias);
            ws.push_back(1.0 / (rel * rel));
        }
    }
    if (xs.size() < 2)
        throw InsufficientSignal("not enough bias points above the noise floor");
    double sw = 0, sx = 0, sy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    rep.slope = sxy / sxx;
    rep.slope_stderr = std::sqrt(1.0 / sxx);
    return rep;
}

} // namespace xbs
