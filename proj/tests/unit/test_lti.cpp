#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qft/error.hpp"
#include "qft/lti.hpp"

using namespace qft;
using Catch::Approx;

namespace {

bool throws_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

} // namespace

TEST_CASE("rational evaluation at j omega") {
  const RationalTransferFunction integrator({1.0}, {1.0, 0.0});
  const Complex v = integrator.at(1.0);
  CHECK(v.real() == Approx(0.0).margin(1e-15));
  CHECK(v.imag() == Approx(-1.0));

  const RationalTransferFunction upper({8400.0}, poly_multiply(poly_multiply(Polynomial{1, 3}, Polynomial{1, 4}),
                                                               poly_multiply(Polynomial{1, 10}, Polynomial{1, 70})));
  CHECK(std::abs(upper.at(1e-9) - Complex{1.0, 0.0}) < 1e-9);

  const RationalTransferFunction plant({1.0}, {1.0, 1.0, 0.0});
  const auto p = to_nichols(plant.at(1.0));
  CHECK(p.phase_deg == Approx(-135.0));
  CHECK(p.gain_db == Approx(-3.0103).margin(1e-4));
}

TEST_CASE("pole on the imaginary axis is reported") {
  const RationalTransferFunction integrator({1.0}, {1.0, 0.0});
  CHECK(throws_kind(ErrorKind::PoleOnAxis, [&] { (void)integrator.at(0.0); }));
}

TEST_CASE("invalid denominators are rejected") {
  CHECK(throws_kind(ErrorKind::InvalidTransferFunction, [] { RationalTransferFunction({1.0}, {}); }));
  CHECK(throws_kind(ErrorKind::InvalidTransferFunction, [] { RationalTransferFunction({1.0}, {0.0, 1.0}); }));
}

TEST_CASE("phase wrapping onto (-360, 0]") {
  CHECK(wrap_phase(10.0) == Approx(-350.0));
  CHECK(wrap_phase(-361.0) == Approx(-1.0));
  CHECK(wrap_phase(-180.0) == -180.0);
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(-360.0) == 0.0);
  CHECK(wrap_phase(720.0) == 0.0);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-5000.0, 5000.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = dist(rng);
    const double w = wrap_phase(x);
    REQUIRE(w > -360.0);
    REQUIRE(w <= 0.0);
    REQUIRE(wrap_phase(w) == w);
    const double turns = (x - w) / 360.0;
    REQUIRE(std::abs(turns - std::round(turns)) < 1e-9);
  }
}

TEST_CASE("Nichols coordinates") {
  const auto one = to_nichols({1.0, 0.0});
  CHECK(one.phase_deg == 0.0);
  CHECK(one.gain_db == 0.0);
  const auto minus_one = to_nichols({-1.0, 0.0});
  CHECK(minus_one.phase_deg == Approx(-180.0));
  CHECK(throws_kind(ErrorKind::ZeroMagnitude, [] { (void)to_nichols({0.0, 0.0}); }));
  const auto p = to_nichols(Complex{1.0, 0.0} / Complex{-1.0, 1.0});
  CHECK(p.phase_deg == Approx(-135.0));
  CHECK(p.gain_db == Approx(-3.0103).margin(1e-4));
}

TEST_CASE("closed-loop and sensitivity gains") {
  CHECK(closed_loop_gain({0.0, 0.0}) == 0.0);
  CHECK(closed_loop_gain({1e12, 0.0}) == Approx(1.0));
  CHECK(closed_loop_gain({-0.54545454545454, 0.0}) == Approx(1.2).epsilon(1e-9));
  CHECK(sensitivity_gain({0.0, 0.0}) == 1.0);
  CHECK(sensitivity_gain({1.0, 0.0}) == 0.5);
  CHECK(sensitivity_gain({-0.5, 0.0}) == 2.0);
  CHECK(throws_kind(ErrorKind::CriticalPoint, [] { (void)closed_loop_gain({-1.0, 0.0}); }));
  CHECK(throws_kind(ErrorKind::CriticalPoint, [] { (void)sensitivity_gain({-1.0, 0.0}); }));
}

TEST_CASE("M-circle sections") {
  const auto s = m_circle_gains(1.2, -180.0);
  REQUIRE(s);
  CHECK(s->upper_db == Approx(20.0 * std::log10(6.0)).margin(1e-9));
  CHECK(s->upper_db == Approx(15.563).margin(5e-4));
  CHECK(s->lower_db == Approx(20.0 * std::log10(1.2 / 2.2)).margin(1e-9));
  CHECK(s->lower_db == Approx(-5.265).margin(5e-4));
  CHECK_FALSE(m_circle_gains(1.2, -90.0));

  const double edge = -rad_to_deg(std::acos(-std::sqrt((1.44 - 1.0) / 1.44)));
  const auto tangent = m_circle_gains(1.2, edge);
  REQUIRE(tangent);
  CHECK(tangent->upper_db == Approx(tangent->lower_db).margin(1e-4));

  const auto range = m_circle_phase_range(1.2);
  CHECK(range.first == Approx(-236.44).margin(0.01));
  CHECK(range.second == Approx(-123.56).margin(0.01));

  CHECK(throws_kind(ErrorKind::InvalidM, [] { (void)m_circle_gains(1.0, -180.0); }));
  CHECK(throws_kind(ErrorKind::InvalidM, [] { (void)m_circle_gains(0.9, -180.0); }));
}

TEST_CASE("M-circle closure property") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> m_dist(1.01, 5.0), phase_dist(-360.0, 0.0);
  int sections = 0;
  for (int i = 0; i < 20000; ++i) {
    const double m = m_dist(rng), phase = phase_dist(rng);
    const auto s = m_circle_gains(m, phase);
    if (!s) continue;
    ++sections;
    REQUIRE(s->upper_db >= s->lower_db);
    for (double g : {s->upper_db, s->lower_db}) {
      const Complex loop = std::polar(from_db(g), deg_to_rad(phase));
      REQUIRE(std::abs(closed_loop_gain(loop) - m) < 1e-9 * m * 10);
    }
  }
  CHECK(sections > 1000);
}

TEST_CASE("conjugate symmetry and dB round trip") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coeff(-5.0, 5.0), freq(0.01, 100.0), db(-200.0, 200.0);
  for (int i = 0; i < 500; ++i) {
    Polynomial num{coeff(rng), coeff(rng)}, den{1.0, coeff(rng), coeff(rng), coeff(rng)};
    const double w = freq(rng);
    const Complex pos = poly_eval(num, {0.0, w}) / poly_eval(den, {0.0, w});
    const Complex neg = poly_eval(num, {0.0, -w}) / poly_eval(den, {0.0, -w});
    REQUIRE(std::abs(pos - std::conj(neg)) <= 1e-9 * std::max(1.0, std::abs(pos)));
    const double x = db(rng);
    REQUIRE(std::abs(to_db(from_db(x)) - x) < 1e-12);
  }
}

TEST_CASE("pole-zero excess") {
  const RationalTransferFunction plant({1.0}, {1.0, 1.0, 0.0});
  CHECK(pole_zero_excess(plant).excess == 2);
  CHECK(pole_zero_excess(plant).leading_ratio == 1.0);
  const RationalTransferFunction integrator({1.0}, {1.0, 0.0});
  CHECK(pole_zero_excess(integrator).excess == 1);
  const RationalTransferFunction pid({3.95, 12.6, 4.46}, {1.0, 0.0});
  const auto loop = plant * pid;
  CHECK(pole_zero_excess(loop).excess == 1);
  CHECK(pole_zero_excess(loop).excess == pole_zero_excess(plant).excess + pole_zero_excess(pid).excess);
}

TEST_CASE("Routh-Hurwitz stability test") {
  CHECK(is_hurwitz(Polynomial{1.0, 4.0, 19.752961}));
  CHECK(is_hurwitz(poly_multiply(Polynomial{1.0, 3.5}, Polynomial{1.0, 7.5})));
  CHECK_FALSE(is_hurwitz(Polynomial{1.0, -1.0}));
  CHECK_FALSE(is_hurwitz(Polynomial{1.0, 0.0, 1.0}));
  CHECK_FALSE(is_hurwitz(Polynomial{1.0, 1.0, 0.0}));

  // Compare against explicit roots of random real-rooted cubics.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> root(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = root(rng), b = root(rng), c = root(rng);
    const Polynomial p = poly_multiply(poly_multiply(Polynomial{1, -a}, Polynomial{1, -b}), Polynomial{1, -c});
    REQUIRE(is_hurwitz(p) == (a < 0 && b < 0 && c < 0));
  }
}
