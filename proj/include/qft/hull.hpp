#pragma once

#include <span>
#include <vector>

#include "qft/lti.hpp"

namespace qft {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

/// Monotone-chain convex hull. Returns indices into `points`, counter-clockwise,
/// starting at the lexicographically smallest (x, y) vertex, with collinear
/// vertices dropped. One index for a single distinct point, two for a collinear
/// set.
std::vector<std::size_t> convex_hull_indices(std::span<const PlanePoint> points);

/// Convex hull in the (phase_deg, gain_db) plane.
std::vector<NicholsPoint> convex_hull_nichols(std::span<const NicholsPoint> points);

/// Signed distance from p to the boundary of a counter-clockwise convex
/// polygon: positive inside, negative outside. Degenerate polygons (a point or
/// a segment) give minus the distance to that point or segment.
double signed_distance_to_hull(std::span<const PlanePoint> hull, PlanePoint p);

} // namespace qft
