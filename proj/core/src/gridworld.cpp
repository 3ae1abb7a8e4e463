#include "riskplan/gridworld.hpp"

#include <cmath>
#include <stdexcept>

#include "riskplan/rng.hpp"

namespace riskplan::grid {

using geom::Config;
using geom::Rect;

bool is_on_grid(const Config& q, const GridMotionModel& model, const Rect& bounds, double tol) {
    const double fx = (q.x - bounds.xmin) / model.dx;
    const double fy = (q.y - bounds.ymin) / model.dy;
    return std::fabs(fx - std::round(fx)) * model.dx <= tol &&
           std::fabs(fy - std::round(fy)) * model.dy <= tol;
}

std::vector<Config> admissible_moves(const Config& q, const GridMotionModel& model,
                                     const Rect& bounds) {
    if (!(model.dx > 0.0) || !(model.dy > 0.0)) {
        throw std::invalid_argument("grid model needs dx > 0 and dy > 0");
    }
    if (!is_on_grid(q, model, bounds)) {
        throw std::invalid_argument("admissible_moves: configuration is off-grid");
    }
    const double threshold = model.rho_scale * std::hypot(model.dx, model.dy);
    std::vector<Config> out;
    out.reserve(8);
    for (int sx = -1; sx <= 1; ++sx) {
        for (int sy = -1; sy <= 1; ++sy) {
            if (sx == 0 && sy == 0) continue;
            const double ux = sx * model.dx;
            const double uy = sy * model.dy;
            if (std::hypot(ux, uy) > threshold + 1e-12) continue;
            const Config next{q.x + ux, q.y + uy};
            if (!bounds.contains(next, 1e-9)) continue;
            out.push_back(next);
        }
    }
    return out;
}

Config snap_to_grid(const Config& q, const GridMotionModel& model, const Rect& bounds) {
    // Half-way points round toward the lower grid index.
    const auto snap1 = [](double v, double lo, double hi, double d) {
        const long long max_i = static_cast<long long>(std::floor((hi - lo) / d + 1e-9));
        long long i = static_cast<long long>(std::ceil((v - lo) / d - 0.5));
        i = std::max(0ll, std::min(i, max_i));
        return lo + static_cast<double>(i) * d;
    };
    return Config{snap1(q.x, bounds.xmin, bounds.xmax, model.dx),
                  snap1(q.y, bounds.ymin, bounds.ymax, model.dy)};
}

namespace {

bool scenario_invariants_hold(const BenchmarkScenario& s) {
    if (!geom::point_in_free_space(s.start, s.env)) return false;
    if (!geom::point_in_free_space(s.goal, s.env)) return false;
    // The straight start-goal segment must be blocked, otherwise the
    // benchmark is trivial.
    if (geom::segment_collision_free(geom::Segment{s.start, s.goal}, s.env)) return false;
    try {
        s.env.validate();
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

BenchmarkScenario default_scenario() {
    BenchmarkScenario s;
    s.env.bounds = Rect{0.0, 0.0, 5.0, 5.0};
    s.env.robot_radius = 0.1;
    s.env.resolution = geom::GridResolution{0.05, 0.05};
    s.env.obstacles = {
        geom::Circle{{1.3, 1.0}, 0.40},
        geom::Circle{{0.9, 2.4}, 0.35},
        geom::Circle{{3.3, 1.5}, 0.45},
        geom::Circle{{2.0, 3.6}, 0.40},
        geom::Circle{{4.0, 3.0}, 0.50},
        geom::CompositeCircles{{
            geom::Circle{{2.15, 2.30}, 0.35},
            geom::Circle{{2.55, 2.55}, 0.45},
            geom::Circle{{2.95, 2.85}, 0.30},
        }},
    };
    s.start = geom::Config{0.5, 0.5};
    s.goal = geom::Config{4.5, 4.5};
    s.description = "5x5 m grid world: five circles and a three-circle composite astride the diagonal";
    return s;
}

}  // namespace

BenchmarkScenario build_benchmark_scenario(std::optional<std::uint64_t> seed) {
    if (!seed) {
        BenchmarkScenario s = default_scenario();
        s.env.validate();
        return s;
    }

    const BenchmarkScenario base = default_scenario();
    RngStream rng(derive_key(*seed, 0x5ce7a310ull));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        BenchmarkScenario s = base;
        s.description = "randomized benchmark variant (seed " + std::to_string(*seed) + ")";
        s.env.obstacles.clear();
        // Five convex circles scattered over the interior.
        for (int i = 0; i < 5; ++i) {
            s.env.obstacles.push_back(geom::Circle{
                {rng.uniform(0.8, 4.2), rng.uniform(0.8, 4.2)},
                rng.uniform(0.3, 0.5)});
        }
        // One composite: three chained circles near the center.
        const Config c0{rng.uniform(1.8, 2.6), rng.uniform(1.8, 2.6)};
        const double r0 = rng.uniform(0.3, 0.45);
        const double r1 = rng.uniform(0.3, 0.45);
        const double r2 = rng.uniform(0.25, 0.4);
        const double ang = rng.uniform(0.0, 6.283185307179586);
        const Config c1{c0.x + 0.8 * r0 * std::cos(ang), c0.y + 0.8 * r0 * std::sin(ang)};
        const Config c2{c1.x + 0.8 * r1 * std::cos(ang + 0.5), c1.y + 0.8 * r1 * std::sin(ang + 0.5)};
        s.env.obstacles.push_back(geom::CompositeCircles{{
            geom::Circle{c0, r0}, geom::Circle{c1, r1}, geom::Circle{c2, r2}}});
        if (scenario_invariants_hold(s)) {
            return s;
        }
    }
    throw std::runtime_error("build_benchmark_scenario: no valid randomized placement in 1000 attempts");
}

}  // namespace riskplan::grid
