#include <benchmark/benchmark.h>

#include "riskplan/gridworld.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/rng.hpp"

using namespace riskplan;
using geom::Config;
using geom::Rect;

namespace {

plan::Tree tree_of(int n, std::uint64_t seed) {
    const Rect bounds{0, 0, 10, 10};
    RngStream rng(seed);
    plan::Tree tree(Config{5, 5}, bounds, 0.3);
    for (int i = 1; i < n; ++i) {
        const Config c{rng.uniform(0, 10), rng.uniform(0, 10)};
        const auto parent = static_cast<std::uint32_t>(rng.uniform(0.0, i));
        const double d = geom::distance(tree.node(parent).config, c);
        tree.add(c, parent, d, d, 0.0);
    }
    return tree;
}

}  // namespace

static void BM_nearest(benchmark::State& state) {
    const plan::Tree tree = tree_of(static_cast<int>(state.range(0)), 3);
    RngStream rng(9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tree.nearest(Config{rng.uniform(0, 10), rng.uniform(0, 10)}));
    }
}
BENCHMARK(BM_nearest)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_radius_query(benchmark::State& state) {
    const plan::Tree tree = tree_of(static_cast<int>(state.range(0)), 3);
    RngStream rng(9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            tree.within(Config{rng.uniform(0, 10), rng.uniform(0, 10)}, 0.6));
    }
}
BENCHMARK(BM_radius_query)->Arg(100)->Arg(1000)->Arg(10000);

// Whole-query cost for both planner modes on an obstacle-free world; the
// gap is the price of the per-neighbor cost sampling.
static void BM_plan_mode(benchmark::State& state) {
    geom::Environment env;
    env.bounds = Rect{0, 0, 10, 10};
    env.resolution = geom::GridResolution{0.1, 0.1};

    plan::PlannerParams p;
    p.n_max = static_cast<int>(state.range(1));
    p.steer_step = 0.3;
    p.neighborhood_radius = 0.6;
    p.rho_max = 0.6;
    p.goal_bias = 0.0;
    p.continue_after_goal = true;
    p.sigma_schedule = {0.2};
    p.risk.n_c = 100;
    const auto mode = state.range(0) == 0 ? plan::Mode::rrt_star : plan::Mode::ra_rrt_star;

    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan::plan(env, {0.5, 0.5}, {9.5, 9.5}, p, mode, seed++));
    }
    state.SetItemsProcessed(state.iterations() * p.n_max);
}
BENCHMARK(BM_plan_mode)
    ->ArgsProduct({{0, 1}, {1000, 4000}})
    ->Unit(benchmark::kMillisecond)
    ->ArgNames({"ra", "n_max"});
