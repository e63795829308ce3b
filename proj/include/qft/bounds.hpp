#pragma once

// Per-frequency constraint contours on the nominal open loop: tracking
// (Horowitz) bounds, disturbance bounds, their pointwise maximum, and the
// M-circle based high-frequency boundary.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qft/lti.hpp"
#include "qft/plant.hpp"

namespace qft {

/// Minimum admissible nominal open-loop gain at one phase. Ordering:
/// NoConstraint < any finite value < Infeasible.
class BoundValue {
public:
  enum class Kind { NoConstraint, Finite, Infeasible };

  static BoundValue finite(double db) { return {Kind::Finite, db}; }
  static BoundValue no_constraint() { return {Kind::NoConstraint, 0.0}; }
  static BoundValue infeasible() { return {Kind::Infeasible, 0.0}; }

  Kind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == Kind::Finite; }
  bool is_no_constraint() const noexcept { return kind_ == Kind::NoConstraint; }
  bool is_infeasible() const noexcept { return kind_ == Kind::Infeasible; }
  double db() const noexcept { return db_; }

  friend bool operator==(const BoundValue&, const BoundValue&) = default;
  friend bool operator<(const BoundValue& a, const BoundValue& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    return a.is_finite() && a.db_ < b.db_;
  }

private:
  BoundValue(Kind kind, double db) : kind_(kind), db_(db) {}

  Kind kind_;
  double db_;
};

BoundValue max(const BoundValue& a, const BoundValue& b);

struct BoundCurve {
  double omega = 0.0;
  std::vector<double> phase_grid;
  std::vector<BoundValue> min_gain_db;
};

/// Uniform phase grid of `count` points on (-360, 0]: -360 + 360 (i+1) / count.
std::vector<double> make_phase_grid(int count);

/// Lower and upper closed-loop magnitude models. Both must be stable and
/// strictly proper.
struct TrackingSpec {
  TrackingSpec(RationalTransferFunction lower, RationalTransferFunction upper);

  RationalTransferFunction lower_model;
  RationalTransferFunction upper_model;

  /// (min, max) of the two model magnitudes in dB at omega.
  std::pair<double, double> corridor_db(double omega) const;
};

/// Allowed closed-loop gain variation at omega, in dB. Throws DegenerateSpread
/// when it falls below `min_spread_db`.
double delta_spread(const TrackingSpec& spec, double omega, double min_spread_db = 0.05);

/// Per-frequency sensitivity caps |S| <= cap (linear magnitude).
struct DisturbanceSpec {
  std::map<double, double> caps;

  std::optional<double> cap_at(double omega) const;
};

struct BisectionOptions {
  double tol_db = 0.01;
  double scan_step_db = 5.0;
  double floor_db = -100.0;
  double ceiling_db = 100.0;

  bool operator==(const BisectionOptions&) const = default;
};

/// Spread (max - min) of |L r / (1 + L r)| in dB over the ratios r, with the
/// nominal L placed at (phase_deg, gain_db).
double closed_loop_spread_db(std::span<const Complex> ratios, double gain_db, double phase_deg);

/// True when |1 / (1 + L r)| <= cap for every ratio.
bool sensitivity_within_cap(std::span<const Complex> ratios, double gain_db, double phase_deg, double cap);

BoundValue horowitz_gain(std::span<const Complex> ratios, double delta_db, double phase_deg,
                         const BisectionOptions& options = {});

BoundValue disturbance_gain(std::span<const Complex> ratios, double cap, double phase_deg,
                            const BisectionOptions& options = {});

/// Ratios used by the bound computations: hull vertices or every grid point.
std::vector<Complex> template_ratios(const Template& tpl, bool use_hull);

BoundCurve horowitz_bound(const Template& tpl, double delta_db, std::span<const double> phase_grid,
                          const BisectionOptions& options = {}, bool use_hull = true, unsigned threads = 1);

BoundCurve disturbance_bound(const Template& tpl, double cap, std::span<const double> phase_grid,
                             const BisectionOptions& options = {}, bool use_hull = true, unsigned threads = 1);

/// Entrywise maximum of the tracking and (optional) disturbance bounds.
BoundCurve performance_bound(const BoundCurve& tracking, const BoundCurve* disturbance);

/// M-circle whose lower half is pushed down by delta_hf_db. `lower_db` holds the
/// untranslated M-circle gain; bottom_db() is the translated one.
struct UContour {
  struct Section {
    double upper_db;
    double lower_db;
  };

  double m_value = 1.0;
  double delta_hf_db = 0.0;
  std::pair<double, double> phase_range;
  std::vector<double> phase_grid;
  std::vector<std::optional<Section>> sections;

  double bottom_db(const Section& s) const { return s.lower_db - delta_hf_db; }

  /// (bottom_db, upper_db) at any phase, or nullopt outside the phase range.
  std::optional<std::pair<double, double>> gain_band(double phase_deg) const;

  /// Strictly inside the region between the bottom and upper curves.
  bool contains(const NicholsPoint& point) const;
};

UContour u_contour(double m_value, double delta_hf_db, std::span<const double> phase_grid);

/// Pointwise maximum of f with the U-contour's upper curve inside its phase
/// range. Throws BoundBelowUContour when a finite f entry lies below the
/// translated bottom there.
BoundCurve combine_with_ucontour(const BoundCurve& f, const UContour& u);

/// Linear interpolation in phase. Outside [first, last] gives NoConstraint.
BoundValue interpolate_bound(const BoundCurve& curve, double phase_deg);

/// Everything needed to evaluate the combined bound at an arbitrary phase
/// without a grid (bisection at the exact phase).
struct FrequencyConstraint {
  double omega = 0.0;
  std::vector<Complex> ratios;
  double delta_db = 0.0;
  std::optional<double> disturbance_cap;
  std::optional<UContour> ucontour;
  BisectionOptions options;

  BoundValue at(double phase_deg) const;
};

} // namespace qft
