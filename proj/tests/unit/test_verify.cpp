#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qft/config.hpp"
#include "qft/error.hpp"
#include "qft/pipeline.hpp"
#include "qft/verify.hpp"

using namespace qft;
using Catch::Approx;

namespace {

DesignProblem single_frequency(BoundValue bound) {
  DesignProblem p;
  p.phase_grid = make_phase_grid(36);
  p.frequencies = {1.0};
  p.nominal_responses = {{1.0, 0.0}};
  p.combined_bounds = {BoundCurve{1.0, p.phase_grid, std::vector<BoundValue>(p.phase_grid.size(), bound)}};
  return p;
}

UncertainPlant example_plant(int points) {
  return UncertainPlant({"k*a"}, {"1", "a", "0"}, {{"a", 1.0, 10.0, points}, {"k", 1.0, 10.0, points}},
                        {{"a", 1.0}, {"k", 1.0}});
}

TrackingSpec example_tracking() {
  const RationalTransferFunction lower({0.6585, 0.6585 * 30.0}, {1.0, 4.0, 4.0 + 3.969 * 3.969});
  const RationalTransferFunction upper({8400.0}, poly_multiply(poly_multiply(Polynomial{1, 3}, Polynomial{1, 4}),
                                                               poly_multiply(Polynomial{1, 10}, Polynomial{1, 70})));
  return {lower, upper};
}

} // namespace

TEST_CASE("default prefilter") {
  const auto f = default_prefilter();
  CHECK(std::abs(f.at(1e-9) - Complex{1.0, 0.0}) < 1e-9);
  const double expected = -20.0 * std::log10(std::sqrt(2.0)) - 20.0 * std::log10(std::abs(Complex{1.0, 3.5 / 7.5}));
  CHECK(to_db(std::abs(f.at(3.5))) == Approx(expected).margin(1e-9));
  CHECK(to_db(std::abs(f.at(3.5))) == Approx(-3.866).margin(1e-3));
  CHECK(f.denominator() == poly_multiply(Polynomial{1.0, 3.5}, Polynomial{1.0, 7.5}));
}

TEST_CASE("brute-force search on a single frequency") {
  const auto p = single_frequency(BoundValue::finite(0.0));
  OracleBox box;
  box.kp = {0.0, 2.0, 1.0};
  box.ki = {0.0, 0.0, 1.0};
  box.kd = {0.0, 0.0, 1.0};
  const auto r = brute_force_design(p, box);
  CHECK(r.best_gains == PidGains{1.0, 0.0, 0.0});
  CHECK(r.best_kd == 0.0);
  CHECK_FALSE(gains_feasible(p, {0.0, 0.0, 0.0}));

  const auto hard = single_frequency(BoundValue::finite(60.0));
  box.kp = {0.0, 0.1, 0.05};
  try {
    (void)brute_force_design(hard, box);
    FAIL("expected NoFeasiblePoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoFeasiblePoint);
  }
}

TEST_CASE("gain axes") {
  CHECK(GainAxis{0.0, 50.0, 0.05}.count() == 1001);
  CHECK(GainAxis{0.0, 0.0, 1.0}.count() == 1);
  CHECK(GainAxis{0.0, 2.0, 1.0}.at(2) == 2.0);
}

TEST_CASE("closed-loop envelope") {
  const auto plant = example_plant(4);
  const PidGains g{12.6, 4.46, 3.95};
  const RationalTransferFunction unity({1.0}, {1.0});
  const std::vector<double> omegas{1e-4, 0.5, 1.0, 10.0};
  const auto rows = closed_loop_envelope(plant, g, unity, example_tracking(), omegas, 2);
  REQUIRE(rows.size() == omegas.size());
  CHECK(rows[0].min_db == Approx(0.0).margin(1e-3));
  CHECK(rows[0].max_db == Approx(0.0).margin(1e-3));

  const auto nominal = plant.nominal_tf();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Complex l = nominal.at(omegas[i]) * pid_frequency_response(g, omegas[i]);
    const double t = to_db(std::abs(l / (1.0 + l)));
    CHECK(rows[i].min_db <= t + 1e-12);
    CHECK(rows[i].max_db >= t - 1e-12);
    const auto [lo, hi] = example_tracking().corridor_db(omegas[i]);
    CHECK(rows[i].lower_db == lo);
    CHECK(rows[i].upper_db == hi);
  }

  const RationalTransferFunction zero({0.0}, {1.0});
  const auto dead = closed_loop_envelope(plant, g, zero, example_tracking(), omegas);
  for (const auto& r : dead) {
    CHECK(std::isinf(r.max_db));
    CHECK(r.max_db < 0);
    CHECK_FALSE(r.within_corridor());
  }
}

TEST_CASE("dense grid covers the design frequencies") {
  const std::vector<double> freqs{0.5, 1, 2, 3, 5, 10, 30, 60};
  const auto grid = default_dense_grid(freqs);
  CHECK(grid.front() == Approx(0.05));
  CHECK(grid.back() == Approx(600.0));
  for (double w : freqs) CHECK(std::find(grid.begin(), grid.end(), w) != grid.end());
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("verification of designs on the reduced problem") {
  const auto cfg = load_config(QFT_SOURCE_DIR "/configs/qft_reduced.json");
  Pipeline pipe(cfg, 4);
  const auto& design = pipe.design();
  REQUIRE(design.feasible());
  const auto& b = pipe.bounds();
  VerifyInputs in{pipe.plant().nominal_tf(), cfg.frequencies, b.combined, b.performance, b.ucontour,
                  default_dense_grid(cfg.frequencies)};

  const auto report = verify_design(in, *design.gains);
  CHECK(report.margins_ok);
  CHECK(report.sweep_ok);
  CHECK_FALSE(report.envelope_ok);

  // Margins recomputed from the plant and the controller response.
  for (std::size_t k = 0; k < cfg.frequencies.size(); ++k) {
    const double w = cfg.frequencies[k];
    const Complex l = evaluate_plant(pipe.plant(), pipe.plant().nominal(), w) * pid_frequency_response(*design.gains, w);
    const auto& row = report.margins[k];
    CHECK(row.loop_gain_db == Approx(to_db(std::abs(l))).margin(1e-9));
    CHECK(row.loop_phase_deg == Approx(nichols_phase(l)).margin(1e-9));
    if (row.slack_db && design.margins[k].slack_db)
      CHECK(*row.slack_db == Approx(*design.margins[k].slack_db).margin(1e-9));
  }

  const PidGains half{design.gains->kp / 2, design.gains->ki / 2, design.gains->kd / 2};
  const auto weak = verify_design(in, half);
  CHECK_FALSE(weak.pass());
  bool negative = false;
  for (const auto& m : weak.margins) negative |= m.slack_db && *m.slack_db < 0;
  CHECK(negative);

  const auto none = verify_design(in, PidGains{});
  CHECK_FALSE(none.pass());
  for (const auto& m : none.margins)
    if (m.bound.is_finite()) CHECK(*m.slack_db < 0);

  auto attached = report;
  attached.attach_envelope({EnvelopeRow{1.0, -1.0, 1.0, -2.0, 0.5}});
  REQUIRE(attached.envelope_ok);
  CHECK_FALSE(*attached.envelope_ok);
  CHECK_FALSE(attached.pass());
}
