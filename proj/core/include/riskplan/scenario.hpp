#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "riskplan/geometry.hpp"

// JSON scenario documents: the environment plus optional start/goal/grid
// keys. Loading validates every invariant before returning.

namespace riskplan {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double rho_scale = 1.0;
    bool snap = true;
};

struct Scenario {
    geom::Environment env;
    std::optional<geom::Config> start;
    std::optional<geom::Config> goal;
    std::optional<GridSpec> grid;
    std::string description;
};

geom::Environment environment_from_json(const nlohmann::json& j);
nlohmann::json environment_to_json(const geom::Environment& env);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

// Reads and validates a scenario file; failures throw ScenarioError with the
// file name and the offending field.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace riskplan
