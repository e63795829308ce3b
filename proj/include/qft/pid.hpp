#pragma once

// Three-term controller algebra and the optimal non-negative PID search over
// pairs of phase-grid points.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qft/bounds.hpp"
#include "qft/lti.hpp"
#include "qft/plant.hpp"

namespace qft {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  bool operator==(const PidGains&) const = default;
};

/// kp + j (kd w - ki / w)
Complex pid_frequency_response(const PidGains& g, double omega);

struct GainPhase {
  double gain = 0.0;
  double psi_deg = 0.0;
};

/// Linear gain and phase in (-90, 90] (or +-90 for kp = 0). Throws ZeroController.
GainPhase pid_gain_phase(const PidGains& g, double omega);

/// Indices of grid phases strictly within 90 deg of the nominal phase, using
/// plain distance on the (-360, 0] sheet. Throws EmptyWindow.
std::vector<std::size_t> phase_window(double nominal_phase_deg, std::span<const double> grid);

/// Unit kernel vector of the 2x3 phase-constraint matrix, ordered (kd, ki, kp).
struct KernelDirection {
  double v21 = 0.0;
  double v22 = 0.0;
  double v23 = 0.0;
  double psi_i_deg = 0.0;
  double psi_j_deg = 0.0;
  double omega_i = 0.0;
  double omega_j = 0.0;

  /// kd w - ki / w along the direction
  double reactive(double omega) const { return v21 * omega - v22 / omega; }
};

/// Rows [1, -1/w^2, -tan(psi)/w] for the two anchors. The largest-magnitude
/// component of the result is positive. Throws RankDeficient.
KernelDirection kernel_direction(double psi_i_deg, double psi_j_deg, double omega_i, double omega_j);

/// Residual |A v| of a direction against its own anchors.
double kernel_residual(const KernelDirection& dir);

/// Nominal-loop non-penetration check on a dense frequency grid.
struct StabilityGuard {
  UContour contour;
  std::vector<double> omegas;
  std::vector<Complex> nominal_responses;
};

/// 500 log-spaced points over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// The guard grid: 500 points over [w1/10, 10 wN] plus 50 per decade up to 1e4 wN.
std::vector<double> guard_frequency_grid(double first_design_omega, double last_design_omega);

StabilityGuard make_stability_guard(const RationalTransferFunction& nominal, UContour contour,
                                    double first_design_omega, double last_design_omega);

/// Smallest scale >= lambda0 that keeps the loop G_o K(lambda dir) out of the
/// U-contour at every guard frequency, or nullopt when no scale can.
std::optional<double> guard_scale(const StabilityGuard& guard, double v21, double v22, double v23, double lambda0);

struct DesignProblem {
  std::vector<double> frequencies;
  std::vector<Complex> nominal_responses;
  std::vector<BoundCurve> combined_bounds;
  std::pair<std::size_t, std::size_t> pair_indices{0, 1};
  std::vector<double> phase_grid;
  /// When non-empty, bounds at the required phases are recomputed by bisection
  /// instead of interpolated.
  std::vector<FrequencyConstraint> exact_bounds;
  std::optional<StabilityGuard> guard;
  unsigned threads = 1;

  void validate() const;
  BoundValue bound_at(std::size_t k, double phase_deg) const;
};

/// 0-based default pair: second and (N-2)-th frequency, falling back to the
/// first and last when those coincide or do not exist.
std::pair<std::size_t, std::size_t> default_pair(std::size_t frequency_count);

struct ScalingBound {
  enum class Status { Finite, Infeasible, Unconstrained };
  Status status = Status::Unconstrained;
  double beta_db = 0.0;
  std::size_t active_index = 0;
};

ScalingBound beta_scaling(double v21, double v22, double v23, const DesignProblem& problem);
inline ScalingBound beta_scaling(const KernelDirection& dir, const DesignProblem& problem) {
  return beta_scaling(dir.v21, dir.v22, dir.v23, problem);
}

/// Gains lambda (v21, v22, v23) with lambda = q 10^(beta/20), or nullopt when
/// two components have strictly opposite signs. Components below 1e-12 in
/// magnitude count as zero.
std::optional<PidGains> candidate_from_kernel(const KernelDirection& dir, double beta_db);

struct FrequencyMargin {
  double omega = 0.0;
  double loop_phase_deg = 0.0;
  double loop_gain_db = 0.0;
  BoundValue bound = BoundValue::no_constraint();
  /// loop gain minus bound; nullopt where the bound places no constraint
  std::optional<double> slack_db;
};

std::vector<FrequencyMargin> margin_report(const DesignProblem& problem, const PidGains& gains);

struct DesignResult {
  std::optional<PidGains> gains;
  std::string reason;
  std::pair<double, double> chosen_phases{0.0, 0.0};
  std::optional<std::size_t> active_index;
  std::vector<double> window_k;
  std::vector<double> window_l;
  /// kd per (window_k, window_l) cell; +inf for rejected cells
  std::vector<std::vector<double>> kd_grid;
  std::vector<FrequencyMargin> margins;
  /// final scale over the scale from beta (1 when the guard did not intervene)
  double guard_factor = 1.0;
  std::size_t accepted_cells = 0;

  bool feasible() const { return gains.has_value(); }
};

DesignResult design_pid(const DesignProblem& problem);

enum class ControllerKind { Pid, Pi, Pd };

/// One-dimensional search over the phase grid at a single anchor frequency.
/// PI minimizes kp with kd = 0; PD minimizes kd with ki = 0.
DesignResult design_pi_pd(const DesignProblem& problem, ControllerKind kind, std::size_t anchor_index);

/// Maps gains of kp + ki/s + kd s/(1 + tau s) to the unfiltered gains used on
/// the plant augmented with 1/(1 + tau s), and back.
struct GainMap {
  double tau = 0.0;

  PidGains to_augmented(const PidGains& g) const;
  /// Throws NegativeMappedGain when a physical gain comes out negative.
  PidGains to_physical(const PidGains& g) const;
};

std::pair<UncertainPlant, GainMap> filtered_derivative_transform(const UncertainPlant& plant, double tau);

} // namespace qft
