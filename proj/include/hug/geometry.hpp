#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hug {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Twice the signed area of triangle (o, a, b); positive when counter-clockwise.
inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Convex polygon, counter-clockwise, no repeated closing vertex.
///
/// A hull with fewer than three vertices is degenerate: one vertex for a
/// single distinct input point, two for a collinear input (the extreme
/// endpoints). Degenerate hulls have zero area.
struct Hull2 {
  std::vector<Point2> vertices;

  bool degenerate() const { return vertices.size() < 3; }
};

/// Tolerance on cross products for the on-boundary containment case.
inline constexpr double kBoundaryTolerance = 1e-12;

/// Andrew's monotone chain. Collinear boundary points are dropped.
/// Throws std::domain_error on empty input.
Hull2 monotone_chain_hull(std::span<const Point2> points);

/// Allocation-free variant: `scratch` is overwritten and `out` receives the hull.
void monotone_chain_hull(std::span<const Point2> points, std::vector<Point2>& scratch,
                         std::vector<Point2>& out);

/// Shoelace area; 0 for degenerate hulls.
double hull_area(const Hull2& hull);
double polygon_area(std::span<const Point2> ccw_vertices);

/// Number of points inside or on the boundary of the hull.
std::size_t count_inside(const Hull2& hull, std::span<const Point2> points);
std::size_t count_inside(std::span<const Point2> ccw_vertices, std::span<const Point2> points);

/// Same as count_inside but over structure-of-arrays coordinates.
std::size_t count_inside(std::span<const Point2> ccw_vertices, std::span<const double> xs,
                         std::span<const double> ys);

bool contains(std::span<const Point2> ccw_vertices, const Point2& p);

}  // namespace hug
