#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/geometry.hpp"

// Grid-constrained motion: the 8-direction single-integrator move set with a
// move-length threshold, grid snapping, and the benchmark scenario used by
// the batch experiments.

namespace riskplan::grid {

struct GridMotionModel {
    double dx = 0.05;
    double dy = 0.05;
    double rho_scale = 1.0;  // multiplier on the move-length threshold sqrt(dx^2 + dy^2)
};

// Grid neighbors of q (up to 8: axis and diagonal unit steps) whose move
// length stays within rho_scale * sqrt(dx^2 + dy^2) and that remain inside
// bounds. q must itself lie on the grid (within 1e-9 per coordinate).
std::vector<geom::Config> admissible_moves(const geom::Config& q, const GridMotionModel& model,
                                           const geom::Rect& bounds);

// Nearest grid point, ties toward lower coordinates, clamped into bounds.
// The grid is anchored at the bounds' lower-left corner.
geom::Config snap_to_grid(const geom::Config& q, const GridMotionModel& model,
                          const geom::Rect& bounds);

bool is_on_grid(const geom::Config& q, const GridMotionModel& model, const geom::Rect& bounds,
                double tol = 1e-9);

struct BenchmarkScenario {
    geom::Environment env;
    geom::Config start;
    geom::Config goal;
    std::string description;
};

// The default benchmark world (five circles plus one three-circle composite
// astride the start-goal diagonal), or a seeded randomized variant with the
// same structure. Randomized placement that cannot satisfy the scenario
// invariants within 1000 attempts throws std::runtime_error.
BenchmarkScenario build_benchmark_scenario(std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace riskplan::grid
