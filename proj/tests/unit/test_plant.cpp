#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qft/error.hpp"
#include "qft/plant.hpp"

using namespace qft;
using Catch::Approx;

namespace {

UncertainPlant example_plant(int points) {
  return UncertainPlant({"k*a"}, {"1", "a", "0"},
                        {{"a", 1.0, 10.0, points}, {"k", 1.0, 10.0, points}}, {{"a", 1.0}, {"k", 1.0}});
}

// Direct complex arithmetic for k a / (s (s + a)).
Complex direct(double a, double k, double w) {
  const Complex s{0.0, w};
  return k * a / (s * (s + a));
}

} // namespace

TEST_CASE("plant evaluation at parameter points") {
  const auto plant = example_plant(10);
  const auto p1 = to_nichols(evaluate_plant(plant, {{"a", 1.0}, {"k", 1.0}}, 1.0));
  CHECK(p1.phase_deg == Approx(-135.0));
  CHECK(p1.gain_db == Approx(-3.0103).margin(1e-4));

  const auto p2 = to_nichols(evaluate_plant(plant, {{"a", 10.0}, {"k", 10.0}}, 1.0));
  CHECK(p2.gain_db == Approx(19.957).margin(1e-3));
  CHECK(p2.phase_deg == Approx(-95.71).margin(1e-2));
  const auto oracle = to_nichols(direct(10.0, 10.0, 1.0));
  CHECK(p2.gain_db == Approx(oracle.gain_db).margin(1e-12));

  CHECK(evaluate_plant(plant, plant.nominal(), 2.0) == plant.nominal_tf().at(2.0));
  try {
    (void)evaluate_plant(plant, {{"a", 11.0}, {"k", 1.0}}, 1.0);
    FAIL("expected OutOfBox");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfBox);
  }
}

TEST_CASE("nominal point") {
  const auto plant = example_plant(10);
  const auto half = nominal_point(plant, 0.5);
  CHECK(half.phase_deg == Approx(-116.57).margin(1e-2));
  CHECK(half.gain_db == Approx(20.0 * std::log10(1.0 / (0.5 * std::sqrt(1.25)))).margin(1e-12));
  CHECK(nominal_point(plant, 3.0).phase_deg == Approx(-161.57).margin(1e-2));
  const auto far1 = nominal_point(plant, 1e4), far2 = nominal_point(plant, 1e5);
  CHECK(far2.phase_deg == Approx(-180.0).margin(0.01));
  CHECK(far2.gain_db - far1.gain_db == Approx(-40.0).margin(1e-3));
}

TEST_CASE("template at omega 1 on a two-point grid") {
  const auto plant = example_plant(2);
  const auto tpl = generate_template(plant, 1.0);
  REQUIRE(tpl.points.size() == 4);
  const Complex nominal = direct(1.0, 1.0, 1.0);
  bool found = false;
  for (const auto& pt : tpl.points) {
    const Complex expected = direct(pt.parameters[0], pt.parameters[1], 1.0) / nominal;
    REQUIRE(std::abs(pt.ratio - expected) < 1e-12);
    if (pt.parameters[0] == 10.0 && pt.parameters[1] == 10.0) found = true;
  }
  CHECK(found);
}

TEST_CASE("zero-uncertainty template is the unit ratio") {
  const UncertainPlant plant({"k*a"}, {"1", "a", "0"}, {{"a", 2.0, 2.0, 1}, {"k", 3.0, 3.0, 1}},
                             {{"a", 2.0}, {"k", 3.0}});
  const auto tpl = generate_template(plant, 1.0);
  for (const auto& pt : tpl.points) REQUIRE(pt.ratio == Complex{1.0, 0.0});
  REQUIRE(tpl.hull.size() == 1);
  CHECK(tpl.hull[0].x == 0.0);
  CHECK(tpl.hull[0].y == 0.0);
  CHECK(tpl.gain_span_db() == 0.0);
}

TEST_CASE("high-frequency hull gain span") {
  const auto plant = example_plant(10);
  const auto tpl = generate_template(plant, 60.0);
  // Oracle: brute force over a 20x20 grid. The extremes sit at the box
  // corners, where the gain ratio is k a |j w + 1| / |j w + a|, so the span
  // approaches 40 dB rather than the 20 dB a k-only variation would give.
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double a = 1.0 + 9.0 * i / 19.0, k = 1.0 + 9.0 * j / 19.0;
      const double g = to_db(std::abs(direct(a, k, 60.0) / direct(1.0, 1.0, 60.0)));
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
  const double corner = to_db(100.0 * std::abs(Complex{1.0, 60.0}) / std::abs(Complex{10.0, 60.0}));
  CHECK(hi - lo == Approx(corner).margin(1e-9));
  CHECK(tpl.gain_span_db() == Approx(hi - lo).margin(1e-9));
}

TEST_CASE("template invariants on random frequencies") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> logw(-1.5, 2.0);
  const auto plant = example_plant(6);
  const auto fine = UncertainPlant({"k*a"}, {"1", "a", "0"}, {{"a", 1.0, 10.0, 11}, {"k", 1.0, 10.0, 11}},
                                   {{"a", 1.0}, {"k", 1.0}});
  for (int trial = 0; trial < 30; ++trial) {
    const double w = std::pow(10.0, logw(rng));
    const auto tpl = generate_template(plant, w);
    bool nominal_seen = false;
    for (const auto& pt : tpl.points) {
      if (pt.parameters[0] == 1.0 && pt.parameters[1] == 1.0) {
        REQUIRE(pt.ratio == Complex{1.0, 0.0});
        nominal_seen = true;
      }
      REQUIRE(signed_distance_to_hull(tpl.hull, relative_nichols(pt.ratio)) >= -1e-9);
    }
    REQUIRE(nominal_seen);
    for (std::size_t drop = 0; drop < tpl.hull.size() && tpl.hull.size() > 2; ++drop) {
      auto reduced = tpl.hull;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(drop));
      bool outside = false;
      for (const auto& pt : tpl.points) outside |= signed_distance_to_hull(reduced, relative_nichols(pt.ratio)) < 0;
      REQUIRE(outside);
    }
    // A refinement of the grid (5 intervals -> 10 intervals) contains the coarse hull.
    const auto refined = generate_template(fine, w);
    for (const auto& v : tpl.hull) REQUIRE(signed_distance_to_hull(refined.hull, v) >= -1e-9);
  }
}

TEST_CASE("denominator lag") {
  const auto plant = example_plant(3);
  const auto lagged = plant.with_denominator_lag(0.01);
  const Complex expected = plant.nominal_tf().at(2.0) / Complex{1.0, 0.02};
  CHECK(std::abs(lagged.nominal_tf().at(2.0) - expected) < 1e-12);
  CHECK(lagged.parameters() == plant.parameters());
}
