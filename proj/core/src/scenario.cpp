#include "riskplan/scenario.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace riskplan {

using geom::Circle;
using geom::CompositeCircles;
using geom::Config;
using geom::ConvexPolygon;
using geom::Environment;
using geom::Obstacle;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ScenarioError("scenario field '" + field + "': " + why);
}

const json& require(const json& j, const char* key, const std::string& path = {}) {
    if (!j.is_object() || !j.contains(key)) {
        fail(path.empty() ? key : path, "missing");
    }
    return j.at(key);
}

double number_at(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

Config config_at(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2) fail(field, "expected [x, y]");
    return Config{number_at(j[0], field + "[0]"), number_at(j[1], field + "[1]")};
}

Circle circle_at(const json& j, const std::string& field) {
    Circle c;
    c.center = config_at(require(j, "center", field + ".center"), field + ".center");
    c.radius = number_at(require(j, "radius", field + ".radius"), field + ".radius");
    return c;
}

Obstacle obstacle_at(const json& j, const std::string& field) {
    const json& type = require(j, "type", field + ".type");
    if (!type.is_string()) fail(field + ".type", "expected a string");
    const std::string t = type.get<std::string>();
    if (t == "circle") {
        return circle_at(j, field);
    }
    if (t == "polygon") {
        const json& verts = require(j, "vertices", field + ".vertices");
        if (!verts.is_array() || verts.size() < 3) fail(field + ".vertices", "expected >= 3 [x, y] pairs");
        ConvexPolygon poly;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            poly.vertices.push_back(config_at(verts[i], field + ".vertices[" + std::to_string(i) + "]"));
        }
        return poly;
    }
    if (t == "composite_circles") {
        const json& circles = require(j, "circles", field + ".circles");
        if (!circles.is_array() || circles.size() < 2) fail(field + ".circles", "expected >= 2 circles");
        CompositeCircles comp;
        for (std::size_t i = 0; i < circles.size(); ++i) {
            comp.circles.push_back(circle_at(circles[i], field + ".circles[" + std::to_string(i) + "]"));
        }
        return comp;
    }
    fail(field + ".type", "unknown obstacle type '" + t + "'");
}

}  // namespace

Environment environment_from_json(const json& j) {
    Environment env;
    const json& bounds = require(j, "bounds");
    if (!bounds.is_array() || bounds.size() != 4) fail("bounds", "expected [xmin, ymin, xmax, ymax]");
    env.bounds = geom::Rect{number_at(bounds[0], "bounds[0]"), number_at(bounds[1], "bounds[1]"),
                            number_at(bounds[2], "bounds[2]"), number_at(bounds[3], "bounds[3]")};
    env.robot_radius = number_at(require(j, "robot_radius"), "robot_radius");
    const json& res = require(j, "resolution");
    if (!res.is_array() || res.size() != 2) fail("resolution", "expected [dx, dy]");
    env.resolution = geom::GridResolution{number_at(res[0], "resolution[0]"),
                                          number_at(res[1], "resolution[1]")};
    if (j.contains("approx_vertices")) {
        env.approx_vertices = j.at("approx_vertices").get<int>();
    }
    if (j.contains("obstacles")) {
        const json& obstacles = j.at("obstacles");
        if (!obstacles.is_array()) fail("obstacles", "expected an array");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            env.obstacles.push_back(obstacle_at(obstacles[i], "obstacles[" + std::to_string(i) + "]"));
        }
    }
    try {
        env.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("scenario: ") + e.what());
    }
    return env;
}

json environment_to_json(const Environment& env) {
    json j;
    j["bounds"] = {env.bounds.xmin, env.bounds.ymin, env.bounds.xmax, env.bounds.ymax};
    j["robot_radius"] = env.robot_radius;
    j["resolution"] = {env.resolution.dx, env.resolution.dy};
    j["approx_vertices"] = env.approx_vertices;
    j["obstacles"] = json::array();
    for (const auto& obs : env.obstacles) {
        json o;
        if (const auto* c = std::get_if<Circle>(&obs)) {
            o["type"] = "circle";
            o["center"] = {c->center.x, c->center.y};
            o["radius"] = c->radius;
        } else if (const auto* p = std::get_if<ConvexPolygon>(&obs)) {
            o["type"] = "polygon";
            o["vertices"] = json::array();
            for (const auto& v : p->vertices) o["vertices"].push_back({v.x, v.y});
        } else {
            o["type"] = "composite_circles";
            o["circles"] = json::array();
            for (const auto& c : std::get<CompositeCircles>(obs).circles) {
                o["circles"].push_back({{"center", {c.center.x, c.center.y}}, {"radius", c.radius}});
            }
        }
        j["obstacles"].push_back(std::move(o));
    }
    return j;
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    s.env = environment_from_json(j);
    if (j.contains("start")) s.start = config_at(j.at("start"), "start");
    if (j.contains("goal")) s.goal = config_at(j.at("goal"), "goal");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        GridSpec spec;
        if (g.contains("rho_scale")) spec.rho_scale = number_at(g.at("rho_scale"), "grid.rho_scale");
        if (g.contains("snap")) {
            if (!g.at("snap").is_boolean()) fail("grid.snap", "expected a boolean");
            spec.snap = g.at("snap").get<bool>();
        }
        s.grid = spec;
    }
    if (j.contains("description")) s.description = j.at("description").get<std::string>();

    if (s.start && !geom::point_in_free_space(*s.start, s.env)) {
        fail("start", "not in free space");
    }
    if (s.goal && !geom::point_in_free_space(*s.goal, s.env)) {
        fail("goal", "not in free space");
    }
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j = environment_to_json(s.env);
    if (s.start) j["start"] = {s.start->x, s.start->y};
    if (s.goal) j["goal"] = {s.goal->x, s.goal->y};
    if (s.grid) j["grid"] = {{"rho_scale", s.grid->rho_scale}, {"snap", s.grid->snap}};
    if (!s.description.empty()) j["description"] = s.description;
    return j;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ScenarioError("scenario file " + path + ": " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const ScenarioError& e) {
        throw ScenarioError(path + ": " + e.what());
    }
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write scenario file: " + path);
    out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace riskplan
