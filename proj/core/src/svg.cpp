#include "riskplan/svg.hpp"

#include <cstdio>
#include <sstream>

namespace riskplan::svg {

using geom::Config;

namespace {

constexpr double kWidth = 800.0;
constexpr double kPad = 20.0;

struct Mapper {
    geom::Rect bounds;
    double scale;
    double height;

    double x(double wx) const { return kPad + (wx - bounds.xmin) * scale; }
    double y(double wy) const { return kPad + (bounds.ymax - wy) * scale; }  // flip: SVG y grows down
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void emit_circle(std::ostringstream& out, const Mapper& m, const geom::Circle& c,
                 const char* style) {
    out << "  <circle cx=\"" << num(m.x(c.center.x)) << "\" cy=\"" << num(m.y(c.center.y))
        << "\" r=\"" << num(c.radius * m.scale) << "\" " << style << "/>\n";
}

void emit_polygon(std::ostringstream& out, const Mapper& m, const geom::ConvexPolygon& p,
                  const char* style) {
    out << "  <polygon points=\"";
    for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        if (i) out << ' ';
        out << num(m.x(p.vertices[i].x)) << ',' << num(m.y(p.vertices[i].y));
    }
    out << "\" " << style << "/>\n";
}

void emit_obstacle(std::ostringstream& out, const Mapper& m, const geom::Obstacle& obs,
                   const char* style) {
    if (const auto* c = std::get_if<geom::Circle>(&obs)) {
        emit_circle(out, m, *c, style);
    } else if (const auto* p = std::get_if<geom::ConvexPolygon>(&obs)) {
        emit_polygon(out, m, *p, style);
    } else {
        for (const auto& c : std::get<geom::CompositeCircles>(obs).circles) {
            emit_circle(out, m, c, style);
        }
    }
}

}  // namespace

std::string render(const Scenario& scenario, const plan::PlanOutcome& outcome) {
    const geom::Rect& b = scenario.env.bounds;
    Mapper m{b, (kWidth - 2.0 * kPad) / b.width(), 0.0};
    m.height = b.height() * m.scale + 2.0 * kPad;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
        << num(m.height) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(m.height) << "\">\n";

    out << "  <rect x=\"" << num(kPad) << "\" y=\"" << num(kPad) << "\" width=\""
        << num(b.width() * m.scale) << "\" height=\"" << num(b.height() * m.scale)
        << "\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

    static constexpr const char* kObstacleStyle = "fill=\"#b0b0b0\" stroke=\"#606060\"";
    static constexpr const char* kDilatedStyle =
        "fill=\"none\" stroke=\"#909090\" stroke-dasharray=\"6,4\"";
    for (const auto& obs : scenario.env.obstacles) {
        emit_obstacle(out, m, obs, kObstacleStyle);
        emit_obstacle(out, m, geom::dilate(obs, scenario.env.robot_radius), kDilatedStyle);
    }

    for (const auto& n : outcome.tree) {
        if (!n.parent) continue;
        const Config& a = outcome.tree[*n.parent].config;
        out << "  <line class=\"tree\" x1=\"" << num(m.x(a.x)) << "\" y1=\"" << num(m.y(a.y))
            << "\" x2=\"" << num(m.x(n.config.x)) << "\" y2=\"" << num(m.y(n.config.y))
            << "\" stroke=\"#3ca03c\" stroke-width=\"0.6\"/>\n";
    }

    const auto& wp = outcome.path.waypoints;
    for (std::size_t i = 1; i < wp.size(); ++i) {
        out << "  <line class=\"path\" x1=\"" << num(m.x(wp[i - 1].x)) << "\" y1=\""
            << num(m.y(wp[i - 1].y)) << "\" x2=\"" << num(m.x(wp[i].x)) << "\" y2=\""
            << num(m.y(wp[i].y)) << "\" stroke=\"#d03030\" stroke-width=\"2.5\"/>\n";
    }

    if (scenario.start) {
        out << "  <circle class=\"start\" cx=\"" << num(m.x(scenario.start->x)) << "\" cy=\""
            << num(m.y(scenario.start->y)) << "\" r=\"5\" fill=\"#2050d0\"/>\n";
    }
    if (scenario.goal) {
        out << "  <circle class=\"goal\" cx=\"" << num(m.x(scenario.goal->x)) << "\" cy=\""
            << num(m.y(scenario.goal->y)) << "\" r=\"5\" fill=\"#d0a020\"/>\n";
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace riskplan::svg
