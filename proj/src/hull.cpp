#include "qft/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qft {

namespace {

double cross(PlanePoint o, PlanePoint a, PlanePoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Turns smaller than this, relative to the edge lengths, count as collinear.
constexpr double kCollinearEps = 1e-12;

bool left_turn(PlanePoint o, PlanePoint a, PlanePoint b) { return cross(o, a, b) > 0.0; }

bool nearly_collinear(PlanePoint o, PlanePoint a, PlanePoint b) {
  const double scale = std::hypot(a.x - o.x, a.y - o.y) * std::hypot(b.x - o.x, b.y - o.y);
  return cross(o, a, b) <= kCollinearEps * scale;
}

double distance_to_segment(PlanePoint a, PlanePoint b, PlanePoint p) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

} // namespace

std::vector<std::size_t> convex_hull_indices(std::span<const PlanePoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y);
  });
  // Exact duplicates keep their first occurrence.
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) {
                            return points[a].x == points[b].x && points[a].y == points[b].y;
                          }),
              order.end());
  if (order.size() <= 2) return order;

  std::vector<std::size_t> hull(2 * order.size());
  std::size_t k = 0;
  for (std::size_t idx : order) {
    while (k >= 2 && !left_turn(points[hull[k - 2]], points[hull[k - 1]], points[idx])) --k;
    hull[k++] = idx;
  }
  const std::size_t lower_size = k + 1;
  for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
    while (k >= lower_size && !left_turn(points[hull[k - 2]], points[hull[k - 1]], points[*it])) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);

  // Drop vertices that sit on the segment joining their neighbours. Doing this
  // after the exact pass keeps the extremes of near-vertical runs whose x
  // coordinates differ only by rounding.
  bool removed = true;
  while (removed && hull.size() > 2) {
    removed = false;
    for (std::size_t i = 0; i < hull.size() && hull.size() > 2; ++i) {
      const std::size_t prev = (i + hull.size() - 1) % hull.size(), next = (i + 1) % hull.size();
      if (nearly_collinear(points[hull[prev]], points[hull[i]], points[hull[next]])) {
        hull.erase(hull.begin() + static_cast<std::ptrdiff_t>(i));
        removed = true;
        break;
      }
    }
  }
  const auto lexi = [&](std::size_t a, std::size_t b) {
    return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y);
  };
  std::rotate(hull.begin(), std::min_element(hull.begin(), hull.end(), lexi), hull.end());
  return hull;
}

std::vector<NicholsPoint> convex_hull_nichols(std::span<const NicholsPoint> points) {
  std::vector<PlanePoint> plane;
  plane.reserve(points.size());
  for (const auto& p : points) plane.push_back({p.phase_deg, p.gain_db});
  std::vector<NicholsPoint> out;
  for (std::size_t idx : convex_hull_indices(plane)) out.push_back(points[idx]);
  return out;
}

double signed_distance_to_hull(std::span<const PlanePoint> hull, PlanePoint p) {
  if (hull.empty()) return -std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return -std::hypot(p.x - hull[0].x, p.y - hull[0].y);
  if (hull.size() == 2) return -distance_to_segment(hull[0], hull[1], p);

  bool inside = true;
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const PlanePoint a = hull[i];
    const PlanePoint b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < 0.0) inside = false;
    nearest = std::min(nearest, distance_to_segment(a, b, p));
  }
  return inside ? nearest : -nearest;
}

} // namespace qft
