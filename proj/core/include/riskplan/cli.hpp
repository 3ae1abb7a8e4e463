#pragma once

// Command-line surface: plan a single query, run benchmark sweeps, compute
// exceedance bounds, and render outcomes as SVG.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 planner failure.

namespace riskplan::cli {

int run(int argc, const char* const* argv);

}  // namespace riskplan::cli
