#include "hug/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hug {

namespace {

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  if (std::abs(cross(a, b, p)) > kBoundaryTolerance) return false;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double t = (p.x - a.x) * dx + (p.y - a.y) * dy;
  const double len2 = dx * dx + dy * dy;
  return t >= -kBoundaryTolerance && t <= len2 + kBoundaryTolerance;
}

bool same_point(const Point2& a, const Point2& p) {
  return std::abs(a.x - p.x) <= kBoundaryTolerance && std::abs(a.y - p.y) <= kBoundaryTolerance;
}

}  // namespace

void monotone_chain_hull(std::span<const Point2> points, std::vector<Point2>& scratch,
                         std::vector<Point2>& out) {
  if (points.empty()) throw std::domain_error("convex hull of an empty point set");

  scratch.assign(points.begin(), points.end());
  std::sort(scratch.begin(), scratch.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());

  const std::size_t n = scratch.size();
  out.clear();
  if (n == 1) {
    out.push_back(scratch[0]);
    return;
  }
  out.resize(2 * n);
  std::size_t k = 0;
  // Lower hull.
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(out[k - 2], out[k - 1], scratch[i]) <= 0.0) --k;
    out[k++] = scratch[i];
  }
  // Upper hull.
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(out[k - 2], out[k - 1], scratch[i]) <= 0.0) --k;
    out[k++] = scratch[i];
  }
  // The last point repeats the first one.
  out.resize(k - 1);
}

Hull2 monotone_chain_hull(std::span<const Point2> points) {
  std::vector<Point2> scratch;
  Hull2 hull;
  monotone_chain_hull(points, scratch, hull.vertices);
  return hull;
}

double polygon_area(std::span<const Point2> v) {
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return std::abs(twice) * 0.5;
}

double hull_area(const Hull2& hull) { return polygon_area(hull.vertices); }

bool contains(std::span<const Point2> v, const Point2& p) {
  switch (v.size()) {
    case 0:
      return false;
    case 1:
      return same_point(v[0], p);
    case 2:
      return on_segment(v[0], v[1], p);
    default:
      for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (cross(v[j], v[i], p) < -kBoundaryTolerance) return false;
      }
      return true;
  }
}

std::size_t count_inside(std::span<const Point2> v, std::span<const Point2> points) {
  std::size_t count = 0;
  for (const auto& p : points) count += contains(v, p) ? 1 : 0;
  return count;
}

std::size_t count_inside(const Hull2& hull, std::span<const Point2> points) {
  return count_inside(std::span<const Point2>(hull.vertices), points);
}

std::size_t count_inside(std::span<const Point2> v, std::span<const double> xs,
                         std::span<const double> ys) {
  const std::size_t m = xs.size();
  if (v.size() < 3) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < m; ++j) count += contains(v, Point2{xs[j], ys[j]}) ? 1 : 0;
    return count;
  }
  // Edge-major loop: the per-point flag update is branch-free and vectorises.
  thread_local std::vector<unsigned char> inside;
  inside.assign(m, 1);
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double ax = v[j].x;
    const double ay = v[j].y;
    const double ex = v[i].x - ax;
    const double ey = v[i].y - ay;
    unsigned char* flag = inside.data();
    const double* px = xs.data();
    const double* py = ys.data();
    for (std::size_t p = 0; p < m; ++p) {
      const double c = ex * (py[p] - ay) - ey * (px[p] - ax);
      flag[p] &= static_cast<unsigned char>(c >= -kBoundaryTolerance);
    }
  }
  std::size_t count = 0;
  for (const auto f : inside) count += f;
  return count;
}

}  // namespace hug
