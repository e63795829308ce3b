#pragma once

// Post-design checks: bound margins, dense U-contour sweep, closed-loop
// envelope against the tracking corridor, and an exhaustive gain-grid search.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qft/bounds.hpp"
#include "qft/pid.hpp"
#include "qft/plant.hpp"

namespace qft {

enum class BoundSource { Performance, UContour };

struct MarginRow {
  double omega = 0.0;
  double loop_phase_deg = 0.0;
  double loop_gain_db = 0.0;
  BoundValue bound = BoundValue::no_constraint();
  std::optional<double> slack_db;
  BoundSource source = BoundSource::Performance;
};

struct SweepRow {
  double omega = 0.0;
  double loop_phase_deg = 0.0;
  double loop_gain_db = 0.0;
  bool inside_ucontour = false;
};

struct EnvelopeRow {
  double omega = 0.0;
  double min_db = 0.0;
  double max_db = 0.0;
  double lower_db = 0.0;
  double upper_db = 0.0;

  bool within_corridor() const { return min_db >= lower_db && max_db <= upper_db; }
};

struct VerificationReport {
  std::vector<MarginRow> margins;
  std::vector<SweepRow> dense_sweep;
  std::vector<EnvelopeRow> envelope;
  bool margins_ok = true;
  bool sweep_ok = true;
  /// unset until an envelope has been attached
  std::optional<bool> envelope_ok;
  std::vector<std::string> reasons;

  bool pass() const { return margins_ok && sweep_ok && envelope_ok.value_or(true); }
  void attach_envelope(std::vector<EnvelopeRow> rows);
};

inline constexpr double kSlackTolerance = 0.05;

struct VerifyInputs {
  RationalTransferFunction nominal;
  std::vector<double> frequencies;
  /// combined (performance + U-contour) bounds, one per frequency
  std::vector<BoundCurve> combined;
  /// performance bounds before the U-contour was merged in; used to label the
  /// active source (may be empty)
  std::vector<BoundCurve> performance;
  UContour ucontour;
  std::vector<double> dense_grid;
};

/// 500 log-spaced points over [w1 / 10, 10 wN] merged with the design frequencies.
std::vector<double> default_dense_grid(std::span<const double> frequencies);

/// Margins at the design frequencies and the dense U-contour sweep. The
/// envelope is not part of this report until attached.
VerificationReport verify_design(const VerifyInputs& inputs, const PidGains& gains);

/// |F L / (1 + L)| over every parameter-grid sample, with L = G(p) K.
std::vector<EnvelopeRow> closed_loop_envelope(const UncertainPlant& plant, const PidGains& gains,
                                              const RationalTransferFunction& prefilter,
                                              const TrackingSpec& tracking, std::span<const double> omegas,
                                              unsigned threads = 1);

/// Unity dc gain, real poles at -3.5 and -7.5.
RationalTransferFunction default_prefilter();

struct GainAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::size_t count() const;
  double at(std::size_t i) const { return min + step * static_cast<double>(i); }
  bool operator==(const GainAxis&) const = default;
};

struct OracleBox {
  GainAxis kp{0.0, 50.0, 0.05};
  GainAxis ki{0.0, 50.0, 0.05};
  GainAxis kd{0.0, 50.0, 0.05};

  bool operator==(const OracleBox&) const = default;
};

struct OracleResult {
  PidGains best_gains;
  double best_kd = 0.0;
  std::size_t evaluations = 0;
  OracleBox box;
};

/// Pointwise feasibility used by the optimizer: |L(jw_k)| at or above the bound
/// at arg L for every design frequency, and no guard frequency inside the
/// U-contour when the problem carries a guard.
bool gains_feasible(const DesignProblem& problem, const PidGains& gains);

/// Exhaustive grid search: smallest kd, then smallest ki, then smallest kp.
/// Throws NoFeasiblePoint.
OracleResult brute_force_design(const DesignProblem& problem, const OracleBox& box, unsigned threads = 1);

} // namespace qft
