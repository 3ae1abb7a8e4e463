#include "riskplan/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace riskplan::geom {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string obstacle_label(std::size_t i) {
    return "obstacles[" + std::to_string(i) + "]";
}

bool circles_connected(const std::vector<Circle>& circles) {
    // Union-of-discs connectivity over the overlap graph.
    const std::size_t n = circles.size();
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < n; ++j) {
            if (seen[j]) continue;
            const double d = distance(circles[i].center, circles[j].center);
            if (d < circles[i].radius + circles[j].radius - kGeomEps) {
                seen[j] = 1;
                ++reached;
                stack.push_back(j);
            }
        }
    }
    return reached == n;
}

void validate_obstacle(const Obstacle& obs, std::size_t index) {
    if (const auto* c = std::get_if<Circle>(&obs)) {
        if (!is_finite(c->center) || !(c->radius > 0.0)) {
            throw std::invalid_argument(obstacle_label(index) + ": circle needs finite center and radius > 0");
        }
    } else if (const auto* p = std::get_if<ConvexPolygon>(&obs)) {
        if (p->vertices.size() < 3) {
            throw std::invalid_argument(obstacle_label(index) + ": polygon needs >= 3 vertices");
        }
        for (const auto& v : p->vertices) {
            if (!is_finite(v)) {
                throw std::invalid_argument(obstacle_label(index) + ": non-finite polygon vertex");
            }
        }
        if (!polygon_is_ccw_convex(*p)) {
            throw std::invalid_argument(obstacle_label(index) +
                                        ": polygon vertices must be counter-clockwise and strictly convex");
        }
    } else {
        const auto& comp = std::get<CompositeCircles>(obs);
        if (comp.circles.size() < 2) {
            throw std::invalid_argument(obstacle_label(index) + ": composite needs >= 2 circles");
        }
        for (const auto& c : comp.circles) {
            if (!is_finite(c.center) || !(c.radius > 0.0)) {
                throw std::invalid_argument(obstacle_label(index) + ": composite member needs radius > 0");
            }
        }
        if (!circles_connected(comp.circles)) {
            throw std::invalid_argument(obstacle_label(index) + ": composite circles must form a connected union");
        }
    }
}

}  // namespace

void Environment::validate() const {
    if (!bounds.valid() || !std::isfinite(bounds.area())) {
        throw std::invalid_argument("bounds: must be a non-degenerate finite rectangle");
    }
    if (!(robot_radius >= 0.0) || !std::isfinite(robot_radius)) {
        throw std::invalid_argument("robot_radius: must be >= 0");
    }
    if (!(resolution.dx > 0.0) || !(resolution.dy > 0.0)) {
        throw std::invalid_argument("resolution: dx and dy must be > 0");
    }
    if (approx_vertices < 3) {
        throw std::invalid_argument("approx_vertices: must be >= 3");
    }
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        validate_obstacle(obstacles[i], i);
    }
    // Free space must be non-empty: probe grid points until one is free.
    const int nx = std::max(2, static_cast<int>(bounds.width() / resolution.dx) + 1);
    const int ny = std::max(2, static_cast<int>(bounds.height() / resolution.dy) + 1);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const Config q{bounds.xmin + bounds.width() * ix / (nx - 1),
                           bounds.ymin + bounds.height() * iy / (ny - 1)};
            if (point_in_free_space(q, *this)) return;
        }
    }
    throw std::invalid_argument("environment: dilated obstacles leave no free space");
}

double cross(const Config& o, const Config& a, const Config& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool polygon_is_ccw_convex(const ConvexPolygon& poly) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Config& a = v[i];
        const Config& b = v[(i + 1) % n];
        const Config& c = v[(i + 2) % n];
        // Strict left turn everywhere; collinear runs would not be their own hull.
        if (cross(a, b, c) <= kGeomEps * kGeomEps) return false;
    }
    return true;
}

bool point_in_convex_polygon(const Config& q, const ConvexPolygon& poly, double tol) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Config& a = v[i];
        const Config& b = v[(i + 1) % n];
        const double len = distance(a, b);
        if (len < kGeomEps) continue;
        // Signed distance of q to edge line; negative = right of edge = outside.
        if (cross(a, b, q) / len < -tol) return false;
    }
    return true;
}

double distance_point_segment(const Config& q, const Config& a, const Config& b) {
    const double abx = b.x - a.x, aby = b.y - a.y;
    const double len2 = abx * abx + aby * aby;
    if (len2 == 0.0) return distance(q, a);
    double t = ((q.x - a.x) * abx + (q.y - a.y) * aby) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(q, Config{a.x + t * abx, a.y + t * aby});
}

namespace {

// -1 / 0 / +1 side of point p relative to directed line a->b, with the
// "on the line" band widened to tol meters.
int side_of_line(const Config& a, const Config& b, const Config& p, double tol) {
    const double len = distance(a, b);
    if (len < kGeomEps) return 0;
    const double d = cross(a, b, p) / len;
    if (d > tol) return 1;
    if (d < -tol) return -1;
    return 0;
}

bool on_segment_box(const Config& a, const Config& b, const Config& p, double tol) {
    return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
           p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

}  // namespace

bool segments_intersect(const Segment& s, const Config& c, const Config& d, double tol) {
    const Config& a = s.a;
    const Config& b = s.b;
    const int o1 = side_of_line(a, b, c, tol);
    const int o2 = side_of_line(a, b, d, tol);
    const int o3 = side_of_line(c, d, a, tol);
    const int o4 = side_of_line(c, d, b, tol);

    if (o1 != o2 && o3 != o4) return true;

    // Near-collinear / touching cases: any endpoint within tol of the other
    // segment counts (tangency is a collision).
    if (o1 == 0 && on_segment_box(a, b, c, tol)) return true;
    if (o2 == 0 && on_segment_box(a, b, d, tol)) return true;
    if (o3 == 0 && on_segment_box(c, d, a, tol)) return true;
    if (o4 == 0 && on_segment_box(c, d, b, tol)) return true;
    return false;
}

bool segment_intersects_circle(const Segment& s, const Circle& c, double tol) {
    return distance_point_segment(c.center, s.a, s.b) <= c.radius + tol;
}

bool segment_intersects_polygon(const Segment& s, const ConvexPolygon& poly, double tol) {
    if (point_in_convex_polygon(s.a, poly, tol) || point_in_convex_polygon(s.b, poly, tol)) {
        return true;
    }
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segments_intersect(s, v[i], v[(i + 1) % n], tol)) return true;
    }
    return false;
}

Rect bounding_box(const Circle& c) {
    return Rect{c.center.x - c.radius, c.center.y - c.radius,
                c.center.x + c.radius, c.center.y + c.radius};
}

Rect bounding_box(const ConvexPolygon& poly) {
    Rect r{poly.vertices[0].x, poly.vertices[0].y, poly.vertices[0].x, poly.vertices[0].y};
    for (const auto& v : poly.vertices) {
        r.xmin = std::min(r.xmin, v.x);
        r.ymin = std::min(r.ymin, v.y);
        r.xmax = std::max(r.xmax, v.x);
        r.ymax = std::max(r.ymax, v.y);
    }
    return r;
}

Rect bounding_box(const Obstacle& obs) {
    if (const auto* c = std::get_if<Circle>(&obs)) return bounding_box(*c);
    if (const auto* p = std::get_if<ConvexPolygon>(&obs)) return bounding_box(*p);
    const auto& comp = std::get<CompositeCircles>(obs);
    Rect r = bounding_box(comp.circles[0]);
    for (const auto& c : comp.circles) {
        const Rect cb = bounding_box(c);
        r.xmin = std::min(r.xmin, cb.xmin);
        r.ymin = std::min(r.ymin, cb.ymin);
        r.xmax = std::max(r.xmax, cb.xmax);
        r.ymax = std::max(r.ymax, cb.ymax);
    }
    return r;
}

bool point_in_obstacle(const Config& q, const Obstacle& obs, double tol) {
    if (const auto* c = std::get_if<Circle>(&obs)) {
        return distance(q, c->center) <= c->radius + tol;
    }
    if (const auto* p = std::get_if<ConvexPolygon>(&obs)) {
        return point_in_convex_polygon(q, *p, tol);
    }
    for (const auto& c : std::get<CompositeCircles>(obs).circles) {
        if (distance(q, c.center) <= c.radius + tol) return true;
    }
    return false;
}

namespace {

ConvexPolygon circumscribed_polygon(const Circle& c, int m) {
    // Regular m-gon containing the circle: circumradius r / cos(pi/m).
    const double rv = c.radius / std::cos(kPi / m);
    ConvexPolygon poly;
    poly.vertices.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double ang = 2.0 * kPi * k / m;
        poly.vertices.push_back(Config{c.center.x + rv * std::cos(ang),
                                       c.center.y + rv * std::sin(ang)});
    }
    return poly;
}

}  // namespace

std::vector<ConvexPolygon> polyhedral_approximation(const Obstacle& obs, int m) {
    if (m < 3) {
        throw std::invalid_argument("polyhedral_approximation: vertex count must be >= 3");
    }
    std::vector<ConvexPolygon> out;
    if (const auto* c = std::get_if<Circle>(&obs)) {
        out.push_back(circumscribed_polygon(*c, m));
    } else if (const auto* p = std::get_if<ConvexPolygon>(&obs)) {
        out.push_back(*p);
    } else {
        for (const auto& c : std::get<CompositeCircles>(obs).circles) {
            out.push_back(circumscribed_polygon(c, m));
        }
    }
    return out;
}

ConvexPolygon dilate_polygon(const ConvexPolygon& poly, double r) {
    if (r == 0.0) return poly;
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    ConvexPolygon out;
    out.vertices.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Config& prev = v[(i + n - 1) % n];
        const Config& cur = v[i];
        const Config& next = v[(i + 1) % n];
        // Outward unit normals of the two adjacent edges (CCW polygon).
        const double l1 = distance(prev, cur), l2 = distance(cur, next);
        const double n1x = (cur.y - prev.y) / l1, n1y = -(cur.x - prev.x) / l1;
        const double n2x = (next.y - cur.y) / l2, n2y = -(next.x - cur.x) / l2;
        // Miter point: intersection of the two offset edge lines,
        // v + r (n1 + n2) / (1 + n1.n2); offset magnitude r / cos(theta/2).
        const double denom = std::max(1.0 + (n1x * n2x + n1y * n2y), 1e-6);
        out.vertices.push_back(Config{cur.x + r * (n1x + n2x) / denom,
                                      cur.y + r * (n1y + n2y) / denom});
    }
    return out;
}

Obstacle dilate(const Obstacle& obs, double r) {
    if (r < 0.0) throw std::invalid_argument("dilate: radius must be >= 0");
    if (const auto* c = std::get_if<Circle>(&obs)) {
        return Circle{c->center, c->radius + r};
    }
    if (const auto* p = std::get_if<ConvexPolygon>(&obs)) {
        return dilate_polygon(*p, r);
    }
    CompositeCircles out = std::get<CompositeCircles>(obs);
    for (auto& c : out.circles) c.radius += r;
    return out;
}

bool point_in_free_space(const Config& q, const Environment& env) {
    if (!is_finite(q) || !env.bounds.contains(q)) return false;
    for (const auto& obs : env.obstacles) {
        if (point_in_obstacle(q, dilate(obs, env.robot_radius))) return false;
    }
    return true;
}

CollisionChecker::CollisionChecker(const Environment& env) : bounds_(env.bounds) {
    for (const auto& obs : env.obstacles) {
        // Segment tests follow the collision procedure: convex obstacles pass
        // through, non-convex ones are replaced by their polyhedral
        // approximations, then everything is dilated by the robot radius.
        if (const auto* c = std::get_if<Circle>(&obs)) {
            seg_circles_.push_back(Circle{c->center, c->radius + env.robot_radius});
        } else if (const auto* p = std::get_if<ConvexPolygon>(&obs)) {
            seg_polygons_.push_back(dilate_polygon(*p, env.robot_radius));
        } else {
            for (const auto& poly : polyhedral_approximation(obs, env.approx_vertices)) {
                seg_polygons_.push_back(dilate_polygon(poly, env.robot_radius));
            }
        }
        // Point tests use the exact dilated region.
        const Obstacle dilated = dilate(obs, env.robot_radius);
        if (const auto* c = std::get_if<Circle>(&dilated)) {
            point_circles_.push_back(*c);
        } else if (const auto* p = std::get_if<ConvexPolygon>(&dilated)) {
            point_polygons_.push_back(*p);
        } else {
            for (const auto& c : std::get<CompositeCircles>(dilated).circles) {
                point_circles_.push_back(c);
            }
        }
    }
    circle_boxes_.reserve(seg_circles_.size());
    for (const auto& c : seg_circles_) circle_boxes_.push_back(bounding_box(c));
    polygon_boxes_.reserve(seg_polygons_.size());
    for (const auto& p : seg_polygons_) polygon_boxes_.push_back(bounding_box(p));
}

namespace {

bool box_overlaps_segment_box(const Rect& box, const Segment& s, double tol) {
    return std::min(s.a.x, s.b.x) <= box.xmax + tol && std::max(s.a.x, s.b.x) >= box.xmin - tol &&
           std::min(s.a.y, s.b.y) <= box.ymax + tol && std::max(s.a.y, s.b.y) >= box.ymin - tol;
}

}  // namespace

bool CollisionChecker::segment_free(const Segment& s) const {
    if (!is_finite(s.a) || !is_finite(s.b)) return false;
    // The workspace boundary acts as an obstacle.
    if (!bounds_.contains(s.a) || !bounds_.contains(s.b)) return false;
    for (std::size_t i = 0; i < seg_circles_.size(); ++i) {
        if (!box_overlaps_segment_box(circle_boxes_[i], s, kGeomEps)) continue;
        if (segment_intersects_circle(s, seg_circles_[i])) return false;
    }
    for (std::size_t i = 0; i < seg_polygons_.size(); ++i) {
        if (!box_overlaps_segment_box(polygon_boxes_[i], s, kGeomEps)) continue;
        if (segment_intersects_polygon(s, seg_polygons_[i])) return false;
    }
    return true;
}

bool CollisionChecker::point_free(const Config& q) const {
    if (!is_finite(q) || !bounds_.contains(q)) return false;
    for (const auto& c : point_circles_) {
        if (distance(q, c.center) <= c.radius + kGeomEps) return false;
    }
    for (const auto& p : point_polygons_) {
        if (point_in_convex_polygon(q, p)) return false;
    }
    return true;
}

bool segment_collision_free(const Segment& seg, const Environment& env) {
    return CollisionChecker(env).segment_free(seg);
}

}  // namespace riskplan::geom
