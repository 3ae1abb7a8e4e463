#include <benchmark/benchmark.h>

#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"

using namespace riskplan;

static void BM_varsigma(benchmark::State& state) {
    double a = 0.0501;
    for (auto _ : state) {
        benchmark::DoNotOptimize(risk::varsigma(a));
        a += 1e-7;
    }
}
BENCHMARK(BM_varsigma);

static void BM_normal_draw(benchmark::State& state) {
    RngStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.normal(1.0, 0.5));
    }
}
BENCHMARK(BM_normal_draw);

// Empirical CVaR cost as a function of the per-segment sample count; this is
// the inner loop of the risk-aware node selection.
static void BM_cvar_empirical(benchmark::State& state) {
    const int n_c = static_cast<int>(state.range(0));
    risk::RiskParams params{0.1, n_c, 0};
    RngStream rng(7);
    for (auto _ : state) {
        RngStream s = rng.stream(1);
        const auto sample = risk::sample_costs({1.0, 0.5}, params, s);
        benchmark::DoNotOptimize(risk::cvar_empirical(sample, 0.1).cvar);
    }
    state.SetItemsProcessed(state.iterations() * n_c);
}
BENCHMARK(BM_cvar_empirical)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_cvar_analytic(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(risk::cvar_alpha({1.0, 0.5}, 0.1));
    }
}
BENCHMARK(BM_cvar_analytic);
