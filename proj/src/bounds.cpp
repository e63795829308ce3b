#include "qft/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "qft/error.hpp"
#include "qft/parallel.hpp"

namespace qft {

BoundValue max(const BoundValue& a, const BoundValue& b) { return a < b ? b : a; }

std::vector<double> make_phase_grid(int count) {
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "phase grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = -360.0 + 360.0 * (i + 1) / count;
  return grid;
}

namespace {

void check_model(const RationalTransferFunction& tf, const char* which) {
  if (!is_hurwitz(tf.denominator()))
    throw Error(ErrorKind::UnstableModel, fmt::format("{} tracking model is not stable", which));
  if (poly_degree(tf.numerator()) >= poly_degree(tf.denominator()))
    throw Error(ErrorKind::UnstableModel, fmt::format("{} tracking model is not strictly proper", which));
}

Complex loop_at(double gain_db, double phase_deg) { return std::polar(from_db(gain_db), deg_to_rad(phase_deg)); }

using Predicate = std::function<bool(double)>;

// Evaluates pred(c); when c lands exactly on the critical point, retries once
// slightly above.
bool feasible_at(const Predicate& pred, double c, double tol) {
  try {
    return pred(c);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CriticalPoint) throw;
    return pred(c + tol / 10.0);
  }
}

BoundValue min_feasible_gain(const Predicate& pred, const BisectionOptions& opt) {
  if (!(opt.tol_db > 0.0) || !(opt.scan_step_db > 0.0) || !(opt.floor_db < opt.ceiling_db))
    throw Error(ErrorKind::InvalidArgument, "invalid bisection options");
  if (feasible_at(pred, opt.floor_db, opt.tol_db)) return BoundValue::no_constraint();
  double lo = opt.floor_db;
  double hi = lo;
  bool found = false;
  for (int k = 1; !found; ++k) {
    hi = std::min(opt.floor_db + k * opt.scan_step_db, opt.ceiling_db);
    if (feasible_at(pred, hi, opt.tol_db)) found = true;
    else if (hi >= opt.ceiling_db) return BoundValue::infeasible();
    else lo = hi;
  }
  while (hi - lo > opt.tol_db) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(pred, mid, opt.tol_db)) hi = mid;
    else lo = mid;
  }
  return BoundValue::finite(hi);
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty phase grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidArgument, "phase grid must be strictly increasing");
}

template <class CellFn>
BoundCurve map_grid(double omega, std::span<const double> grid, unsigned threads, CellFn&& cell) {
  check_grid(grid);
  BoundCurve curve;
  curve.omega = omega;
  curve.phase_grid.assign(grid.begin(), grid.end());
  curve.min_gain_db.assign(grid.size(), BoundValue::no_constraint());
  parallel_for(grid.size(), threads, [&](std::size_t i) { curve.min_gain_db[i] = cell(grid[i]); });
  return curve;
}

} // namespace

TrackingSpec::TrackingSpec(RationalTransferFunction lower, RationalTransferFunction upper)
    : lower_model(std::move(lower)), upper_model(std::move(upper)) {
  check_model(lower_model, "lower");
  check_model(upper_model, "upper");
}

std::pair<double, double> TrackingSpec::corridor_db(double omega) const {
  const double a = to_db(std::abs(lower_model.at(omega)));
  const double b = to_db(std::abs(upper_model.at(omega)));
  return std::minmax(a, b);
}

double delta_spread(const TrackingSpec& spec, double omega, double min_spread_db) {
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  const auto [lo, hi] = spec.corridor_db(omega);
  const double spread = hi - lo;
  if (spread < min_spread_db)
    throw Error(ErrorKind::DegenerateSpread,
                fmt::format("tracking spread {} dB at omega = {} is below {} dB", spread, omega, min_spread_db));
  return spread;
}

std::optional<double> DisturbanceSpec::cap_at(double omega) const {
  auto it = caps.find(omega);
  if (it == caps.end()) return std::nullopt;
  return it->second;
}

double closed_loop_spread_db(std::span<const Complex> ratios, double gain_db, double phase_deg) {
  const Complex loop = loop_at(gain_db, phase_deg);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Complex& r : ratios) {
    const double t = to_db(closed_loop_gain(loop * r));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return ratios.empty() ? 0.0 : hi - lo;
}

bool sensitivity_within_cap(std::span<const Complex> ratios, double gain_db, double phase_deg, double cap) {
  const Complex loop = loop_at(gain_db, phase_deg);
  return std::all_of(ratios.begin(), ratios.end(),
                     [&](const Complex& r) { return sensitivity_gain(loop * r) <= cap; });
}

BoundValue horowitz_gain(std::span<const Complex> ratios, double delta_db, double phase_deg,
                         const BisectionOptions& options) {
  if (ratios.empty()) throw Error(ErrorKind::InvalidArgument, "empty template");
  if (!(delta_db > 0.0)) throw Error(ErrorKind::InvalidArgument, "spread must be positive");
  return min_feasible_gain(
      [&](double c) { return closed_loop_spread_db(ratios, c, phase_deg) <= delta_db; }, options);
}

BoundValue disturbance_gain(std::span<const Complex> ratios, double cap, double phase_deg,
                            const BisectionOptions& options) {
  if (ratios.empty()) throw Error(ErrorKind::InvalidArgument, "empty template");
  if (!(cap > 0.0)) throw Error(ErrorKind::InvalidArgument, "sensitivity cap must be positive");
  return min_feasible_gain([&](double c) { return sensitivity_within_cap(ratios, c, phase_deg, cap); },
                           options);
}

std::vector<Complex> template_ratios(const Template& tpl, bool use_hull) {
  return use_hull ? tpl.hull_ratios() : tpl.all_ratios();
}

BoundCurve horowitz_bound(const Template& tpl, double delta_db, std::span<const double> phase_grid,
                          const BisectionOptions& options, bool use_hull, unsigned threads) {
  const auto ratios = template_ratios(tpl, use_hull);
  return map_grid(tpl.omega, phase_grid, threads,
                  [&](double phase) { return horowitz_gain(ratios, delta_db, phase, options); });
}

BoundCurve disturbance_bound(const Template& tpl, double cap, std::span<const double> phase_grid,
                             const BisectionOptions& options, bool use_hull, unsigned threads) {
  const auto ratios = template_ratios(tpl, use_hull);
  return map_grid(tpl.omega, phase_grid, threads,
                  [&](double phase) { return disturbance_gain(ratios, cap, phase, options); });
}

BoundCurve performance_bound(const BoundCurve& tracking, const BoundCurve* disturbance) {
  if (!disturbance) return tracking;
  if (tracking.omega != disturbance->omega || tracking.phase_grid != disturbance->phase_grid)
    throw Error(ErrorKind::GridMismatch, "tracking and disturbance bounds use different grids");
  BoundCurve out = tracking;
  for (std::size_t i = 0; i < out.min_gain_db.size(); ++i)
    out.min_gain_db[i] = max(tracking.min_gain_db[i], disturbance->min_gain_db[i]);
  return out;
}

std::optional<std::pair<double, double>> UContour::gain_band(double phase_deg) const {
  const double phase = wrap_phase(phase_deg);
  if (phase < phase_range.first || phase > phase_range.second) return std::nullopt;
  const auto section = m_circle_gains(m_value, phase);
  if (!section) return std::nullopt;
  return std::pair{section->lower_db - delta_hf_db, section->upper_db};
}

bool UContour::contains(const NicholsPoint& point) const {
  const auto band = gain_band(point.phase_deg);
  return band && point.gain_db > band->first && point.gain_db < band->second;
}

UContour u_contour(double m_value, double delta_hf_db, std::span<const double> phase_grid) {
  if (!(m_value > 1.0)) throw Error(ErrorKind::InvalidM, "M must exceed 1");
  if (!(delta_hf_db >= 0.0)) throw Error(ErrorKind::InvalidArgument, "high-frequency translation must be >= 0");
  UContour u;
  u.m_value = m_value;
  u.delta_hf_db = delta_hf_db;
  u.phase_range = m_circle_phase_range(m_value);
  u.phase_grid.assign(phase_grid.begin(), phase_grid.end());
  for (double phase : phase_grid) {
    const auto s = (phase >= u.phase_range.first && phase <= u.phase_range.second) ? m_circle_gains(m_value, phase)
                                                                                   : std::nullopt;
    if (s) u.sections.push_back(UContour::Section{s->upper_db, s->lower_db});
    else u.sections.emplace_back();
  }
  return u;
}

BoundCurve combine_with_ucontour(const BoundCurve& f, const UContour& u) {
  if (f.phase_grid != u.phase_grid)
    throw Error(ErrorKind::GridMismatch, "bound curve and U-contour use different phase grids");
  BoundCurve out = f;
  for (std::size_t i = 0; i < f.min_gain_db.size(); ++i) {
    const auto& s = u.sections[i];
    if (!s) continue;
    const BoundValue& v = f.min_gain_db[i];
    if (v.is_finite() && v.db() < u.bottom_db(*s))
      throw Error(ErrorKind::BoundBelowUContour,
                  fmt::format("bound at omega = {}, phase = {} deg ({} dB) lies below the high-frequency "
                              "boundary ({} dB)",
                              f.omega, f.phase_grid[i], v.db(), u.bottom_db(*s)));
    out.min_gain_db[i] = max(v, BoundValue::finite(s->upper_db));
  }
  return out;
}

BoundValue interpolate_bound(const BoundCurve& curve, double phase_deg) {
  const auto& grid = curve.phase_grid;
  if (grid.empty() || phase_deg < grid.front() || phase_deg > grid.back()) return BoundValue::no_constraint();
  auto it = std::lower_bound(grid.begin(), grid.end(), phase_deg);
  const auto hi = static_cast<std::size_t>(it - grid.begin());
  if (*it == phase_deg) return curve.min_gain_db[hi];
  const std::size_t lo = hi - 1;
  const BoundValue& a = curve.min_gain_db[lo];
  const BoundValue& b = curve.min_gain_db[hi];
  if (a.is_infeasible() || b.is_infeasible()) return BoundValue::infeasible();
  if (a.is_no_constraint() && b.is_no_constraint()) return BoundValue::no_constraint();
  if (a.is_no_constraint()) return b;
  if (b.is_no_constraint()) return a;
  const double t = (phase_deg - grid[lo]) / (grid[hi] - grid[lo]);
  return BoundValue::finite(a.db() + t * (b.db() - a.db()));
}

BoundValue FrequencyConstraint::at(double phase_deg) const {
  const double phase = wrap_phase(phase_deg);
  BoundValue f = horowitz_gain(ratios, delta_db, phase, options);
  if (disturbance_cap) f = max(f, disturbance_gain(ratios, *disturbance_cap, phase, options));
  if (ucontour) {
    if (const auto band = ucontour->gain_band(phase)) {
      if (f.is_finite() && f.db() < band->first)
        throw Error(ErrorKind::BoundBelowUContour,
                    fmt::format("bound at omega = {}, phase = {} deg lies below the high-frequency boundary", omega,
                                phase));
      f = max(f, BoundValue::finite(band->second));
    }
  }
  return f;
}

} // namespace qft
