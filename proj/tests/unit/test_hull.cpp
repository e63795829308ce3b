#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "qft/hull.hpp"

using namespace qft;

namespace {

std::vector<PlanePoint> pick(std::span<const PlanePoint> pts, const std::vector<std::size_t>& idx) {
  std::vector<PlanePoint> out;
  for (auto i : idx) out.push_back(pts[i]);
  return out;
}

double cross(PlanePoint o, PlanePoint a, PlanePoint b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

} // namespace

TEST_CASE("collinear input keeps the two extremes") {
  const std::vector<PlanePoint> pts{{0, 0}, {1, 1}, {2, 2}};
  const auto idx = convex_hull_indices(pts);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 0);
  CHECK(idx[1] == 2);
}

TEST_CASE("square with centre gives its corners counter-clockwise") {
  const std::vector<PlanePoint> pts{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}};
  const auto hull = pick(pts, convex_hull_indices(pts));
  REQUIRE(hull.size() == 4);
  CHECK(hull[0].x == 0);
  CHECK(hull[0].y == 0);
  for (std::size_t i = 0; i < hull.size(); ++i)
    CHECK(cross(hull[i], hull[(i + 1) % 4], hull[(i + 2) % 4]) > 0);
}

TEST_CASE("single and duplicate points") {
  const std::vector<PlanePoint> one{{3, 4}};
  CHECK(convex_hull_indices(one).size() == 1);
  const std::vector<PlanePoint> dup{{3, 4}, {3, 4}, {3, 4}};
  CHECK(convex_hull_indices(dup).size() == 1);
  const std::vector<NicholsPoint> n{{-10.0, 1.0}, {-20.0, 2.0}, {-15.0, 5.0}, {-15.0, 2.5}};
  CHECK(convex_hull_nichols(n).size() == 3);
}

TEST_CASE("random discs: soundness and minimality") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> r(0.0, 1.0), t(0.0, 2.0 * 3.141592653589793);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PlanePoint> pts;
    for (int i = 0; i < 100; ++i) {
      const double rad = std::sqrt(r(rng)), ang = t(rng);
      pts.push_back({rad * std::cos(ang), rad * std::sin(ang)});
    }
    const auto idx = convex_hull_indices(pts);
    const auto hull = pick(pts, idx);
    for (const auto& p : pts) REQUIRE(signed_distance_to_hull(hull, p) >= -1e-12);
    for (std::size_t i = 0; i < hull.size(); ++i)
      REQUIRE(cross(hull[i], hull[(i + 1) % hull.size()], hull[(i + 2) % hull.size()]) > 0);
    // Dropping any vertex leaves that vertex outside the reduced polygon.
    for (std::size_t drop = 0; drop < hull.size(); ++drop) {
      auto reduced = hull;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(drop));
      REQUIRE(signed_distance_to_hull(reduced, hull[drop]) < 0);
    }
    // Lexicographically smallest point first.
    const auto smallest = *std::min_element(pts.begin(), pts.end(), [](auto a, auto b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    REQUIRE(hull.front().x == smallest.x);
  }
}

TEST_CASE("signed distance") {
  const std::vector<PlanePoint> square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(signed_distance_to_hull(square, {1, 1}) == Catch::Approx(1.0));
  CHECK(signed_distance_to_hull(square, {3, 1}) == Catch::Approx(-1.0));
  const std::vector<PlanePoint> seg{{0, 0}, {2, 0}};
  CHECK(signed_distance_to_hull(seg, {1, 1}) == Catch::Approx(-1.0));
}
