#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// 2D primitives, obstacle shapes, conservative dilation and polyhedral
// approximation, and the exact segment collision tests used by the planner.
// All predicates treat tangency (within kGeomEps) as a collision.

namespace riskplan::geom {

inline constexpr double kGeomEps = 1e-9;

struct Config {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Config& a, const Config& b) {
        return a.x == b.x && a.y == b.y;
    }
};

inline bool is_finite(const Config& c) {
    return std::isfinite(c.x) && std::isfinite(c.y);
}

inline double distance(const Config& a, const Config& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Segment {
    Config a;
    Config b;

    double length() const { return distance(a, b); }
};

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool contains(const Config& c, double tol = 0.0) const {
        return c.x >= xmin - tol && c.x <= xmax + tol &&
               c.y >= ymin - tol && c.y <= ymax + tol;
    }
    Rect intersected(const Rect& o) const {
        return Rect{std::max(xmin, o.xmin), std::max(ymin, o.ymin),
                    std::min(xmax, o.xmax), std::min(ymax, o.ymax)};
    }
    bool valid() const { return xmax > xmin && ymax > ymin; }
};

struct Circle {
    Config center;
    double radius = 0.0;
};

// Vertices in counter-clockwise order forming their own convex hull.
struct ConvexPolygon {
    std::vector<Config> vertices;
};

// Union of >= 2 pairwise-connected overlapping circles; the one non-convex
// shape the planner knows about.
struct CompositeCircles {
    std::vector<Circle> circles;
};

using Obstacle = std::variant<Circle, ConvexPolygon, CompositeCircles>;

struct GridResolution {
    double dx = 0.05;
    double dy = 0.05;
};

struct Environment {
    Rect bounds;
    std::vector<Obstacle> obstacles;
    double robot_radius = 0.0;
    GridResolution resolution;
    int approx_vertices = 16;  // vertex count for polyhedral approximations

    // Throws std::invalid_argument with a description of the first violated
    // invariant; the message names the offending obstacle by index.
    void validate() const;
};

// --- low-level predicates (exposed for tests and oracles) ---

double cross(const Config& o, const Config& a, const Config& b);
bool polygon_is_ccw_convex(const ConvexPolygon& poly);
bool point_in_convex_polygon(const Config& q, const ConvexPolygon& poly, double tol = kGeomEps);
double distance_point_segment(const Config& q, const Config& a, const Config& b);
bool segments_intersect(const Segment& s, const Config& c, const Config& d, double tol = kGeomEps);
bool segment_intersects_circle(const Segment& s, const Circle& c, double tol = kGeomEps);
bool segment_intersects_polygon(const Segment& s, const ConvexPolygon& poly, double tol = kGeomEps);
Rect bounding_box(const Obstacle& obs);
Rect bounding_box(const ConvexPolygon& poly);
Rect bounding_box(const Circle& c);

// Point containment in the raw (undilated) obstacle region.
bool point_in_obstacle(const Config& q, const Obstacle& obs, double tol = kGeomEps);

// --- module operations ---

// Conservative convex cover of an obstacle: circles become circumscribed
// regular m-gons (circumradius r / cos(pi/m)), composites one m-gon per
// member, convex polygons pass through unchanged. m < 3 is rejected.
std::vector<ConvexPolygon> polyhedral_approximation(const Obstacle& obs, int m);

// Grow an obstacle by r. Polygons use the miter offset (each vertex pushed
// along its angle bisector to distance r / cos(theta/2)), a conservative
// outer bound of the exact Minkowski sum with a disc.
Obstacle dilate(const Obstacle& obs, double r);
ConvexPolygon dilate_polygon(const ConvexPolygon& poly, double r);

bool point_in_free_space(const Config& q, const Environment& env);

// Precomputed collision geometry: non-convex obstacles replaced by their
// polyhedral approximations, everything dilated by the robot radius, with
// bounding boxes for culling. Build once per environment.
class CollisionChecker {
  public:
    explicit CollisionChecker(const Environment& env);

    bool segment_free(const Segment& s) const;
    bool point_free(const Config& q) const;
    const Rect& bounds() const { return bounds_; }

  private:
    Rect bounds_;
    std::vector<Circle> seg_circles_;        // dilated convex circles
    std::vector<ConvexPolygon> seg_polygons_;  // dilated polygons incl. approximations
    std::vector<Rect> circle_boxes_;
    std::vector<Rect> polygon_boxes_;
    std::vector<Circle> point_circles_;      // exact dilated circles (incl. composite members)
    std::vector<ConvexPolygon> point_polygons_;
};

bool segment_collision_free(const Segment& seg, const Environment& env);

}  // namespace riskplan::geom
