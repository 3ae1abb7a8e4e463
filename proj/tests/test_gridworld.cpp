#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "riskplan/gridworld.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/rng.hpp"

using namespace riskplan;
using namespace riskplan::grid;
using geom::Config;
using geom::Rect;

namespace {
const Rect kBounds{0.0, 0.0, 1.0, 1.0};
const GridMotionModel kModel{0.1, 0.1, 1.0};
}  // namespace

TEST_CASE("admissible_moves: interior 8, corner 3, threshold filter") {
    CHECK(admissible_moves({0.5, 0.5}, kModel, kBounds).size() == 8);
    CHECK(admissible_moves({0.0, 0.0}, kModel, kBounds).size() == 3);
    CHECK(admissible_moves({0.5, 0.0}, kModel, kBounds).size() == 5);

    // rho_scale = 0.9 shrinks the threshold below the diagonal length.
    const GridMotionModel tight{0.1, 0.1, 0.9};
    const auto moves = admissible_moves({0.5, 0.5}, tight, kBounds);
    CHECK(moves.size() == 4);
    for (const auto& m : moves) {
        CHECK(std::hypot(m.x - 0.5, m.y - 0.5) == doctest::Approx(0.1));
    }

    CHECK_THROWS_AS(admissible_moves({0.512, 0.5}, kModel, kBounds), std::invalid_argument);
}

TEST_CASE("admissible_moves symmetry: reverse move admissible from the target") {
    RngStream rng(8);
    for (int i = 0; i < 200; ++i) {
        const double x = 0.1 * static_cast<int>(rng.uniform(1.0, 9.99));
        const double y = 0.1 * static_cast<int>(rng.uniform(1.0, 9.99));
        for (const auto& m : admissible_moves({x, y}, kModel, kBounds)) {
            bool found = false;
            for (const auto& back : admissible_moves(m, kModel, kBounds)) {
                if (std::fabs(back.x - x) < 1e-12 && std::fabs(back.y - y) < 1e-12) found = true;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("snap_to_grid: rounding, half-way ties toward lower, idempotence") {
    const Config on_grid = snap_to_grid({0.3, 0.7}, kModel, kBounds);
    CHECK(on_grid.x == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(on_grid.y == doctest::Approx(0.7).epsilon(1e-12));
    const Config snapped = snap_to_grid({0.26, 0.24}, kModel, kBounds);
    CHECK(snapped.x == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(snapped.y == doctest::Approx(0.2).epsilon(1e-12));

    const Config tie = snap_to_grid({0.25, 0.35}, kModel, kBounds);
    CHECK(tie.x == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(tie.y == doctest::Approx(0.3).epsilon(1e-12));

    RngStream rng(12);
    for (int i = 0; i < 1000; ++i) {
        const Config q{rng.uniform01(), rng.uniform01()};
        const Config once = snap_to_grid(q, kModel, kBounds);
        const Config twice = snap_to_grid(once, kModel, kBounds);
        CHECK(once == twice);
        CHECK(is_on_grid(once, kModel, kBounds));
    }
}

TEST_CASE("default benchmark scenario satisfies its invariants") {
    const BenchmarkScenario s = build_benchmark_scenario();
    CHECK(s.env.obstacles.size() == 6);
    int composites = 0;
    for (const auto& obs : s.env.obstacles) {
        if (const auto* c = std::get_if<geom::CompositeCircles>(&obs)) {
            ++composites;
            CHECK(c->circles.size() == 3);
        }
    }
    CHECK(composites == 1);
    CHECK(geom::point_in_free_space(s.start, s.env));
    CHECK(geom::point_in_free_space(s.goal, s.env));
    CHECK_FALSE(geom::segment_collision_free({s.start, s.goal}, s.env));
    CHECK_NOTHROW(s.env.validate());
}

TEST_CASE("seeded scenario variants are reproducible and valid") {
    const BenchmarkScenario a = build_benchmark_scenario(1234);
    const BenchmarkScenario b = build_benchmark_scenario(1234);
    REQUIRE(a.env.obstacles.size() == b.env.obstacles.size());
    CHECK(a.start == b.start);
    const auto& ca = std::get<geom::Circle>(a.env.obstacles[0]);
    const auto& cb = std::get<geom::Circle>(b.env.obstacles[0]);
    CHECK(ca.center == cb.center);
    CHECK(ca.radius == cb.radius);

    const BenchmarkScenario c = build_benchmark_scenario(99);
    CHECK_FALSE(geom::segment_collision_free({c.start, c.goal}, c.env));
    CHECK_NOTHROW(c.env.validate());
}

TEST_CASE("grid-mode planning visits grid points via admissible moves only") {
    const BenchmarkScenario s = build_benchmark_scenario();
    plan::PlannerParams p = plan::PlannerParams::grid_defaults(s.env);
    p.n_max = 1500;
    p.sigma_schedule = {0.1};
    const auto out = plan::plan(s.env, s.start, s.goal, p, plan::Mode::ra_rrt_star, 7);

    const GridMotionModel model{s.env.resolution.dx, s.env.resolution.dy, 1.0};
    const double threshold = std::hypot(model.dx, model.dy) + 1e-9;
    for (const auto& n : out.tree) {
        CHECK(is_on_grid(n.config, model, s.env.bounds));
        if (!n.parent) continue;
        const auto& parent = out.tree[*n.parent].config;
        const double ux = std::fabs(n.config.x - parent.x);
        const double uy = std::fabs(n.config.y - parent.y);
        CHECK(std::hypot(ux, uy) <= threshold);
        CHECK((ux < 1e-9 || std::fabs(ux - model.dx) < 1e-9));
        CHECK((uy < 1e-9 || std::fabs(uy - model.dy) < 1e-9));
    }
}
