#include <benchmark/benchmark.h>

#include "xbs/calculus.hpp"
#include "xbs/expand.hpp"
#include "xbs/ibp.hpp"

using namespace xbs;

static void BM_Canonicalize(benchmark::State &state) {
    // the largest forest class the tables touch: grade-3 chain with lianas
    Forest f = chain(3);
    f.add_liana(0, 2);
    f.add_liana(1, 3);
    for (auto _ : state) {
        Forest c = canonicalize(f);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_Canonicalize);

static void BM_Expectation(benchmark::State &state) {
    Series s = Series::term(root_with_crosses(static_cast<int>(state.range(0))));
    for (auto _ : state) {
        Series e = expectation(s);
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(BM_Expectation)->Arg(4)->Arg(6)->Arg(8);

static void BM_GeneratorPower3(benchmark::State &state) {
    for (auto _ : state) {
        Series l3 = generator_power(3, 6);
        benchmark::DoNotOptimize(l3);
    }
}
BENCHMARK(BM_GeneratorPower3);

static void BM_ReduceL3(benchmark::State &state) {
    Series l3 = generator_power(3, 6);
    for (auto _ : state) {
        auto [zero, witness] = equivalent_zero(l3, Assumption::gradient_f);
        benchmark::DoNotOptimize(zero);
    }
}
BENCHMARK(BM_ReduceL3);

static void BM_ThetaExpansion(benchmark::State &state) {
    Scheme th = theta_method(Coefficient(Rational(1, 2)));
    for (auto _ : state) {
        auto ops = operator_expansion(th, 1);
        benchmark::DoNotOptimize(ops);
    }
}
BENCHMARK(BM_ThetaExpansion);

BENCHMARK_MAIN();
