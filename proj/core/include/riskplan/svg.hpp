#pragma once

#include <string>

#include "riskplan/planner.hpp"
#include "riskplan/scenario.hpp"

// Static SVG rendering of a planning outcome: workspace, obstacles with
// dashed dilated outlines, tree edges, and the highlighted path.

namespace riskplan::svg {

std::string render(const Scenario& scenario, const plan::PlanOutcome& outcome);

}  // namespace riskplan::svg
