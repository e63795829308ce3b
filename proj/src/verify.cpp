#include "qft/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qft/error.hpp"
#include "qft/parallel.hpp"

namespace qft {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BoundSource classify(const VerifyInputs& in, std::size_t k, double phase, const BoundValue& combined) {
  if (in.performance.size() != in.combined.size()) return BoundSource::Performance;
  const BoundValue perf = interpolate_bound(in.performance[k], phase);
  return perf == combined ? BoundSource::Performance : BoundSource::UContour;
}

bool loop_inside(const UContour& u, Complex loop) {
  if (std::abs(loop) == 0.0) return false;
  return u.contains(to_nichols(loop));
}

} // namespace

void VerificationReport::attach_envelope(std::vector<EnvelopeRow> rows) {
  envelope = std::move(rows);
  envelope_ok = true;
  for (const auto& row : envelope)
    if (!row.within_corridor()) {
      envelope_ok = false;
      reasons.push_back(fmt::format("closed-loop envelope [{:.3f}, {:.3f}] dB leaves corridor [{:.3f}, {:.3f}] dB "
                                    "at omega = {}",
                                    row.min_db, row.max_db, row.lower_db, row.upper_db, row.omega));
    }
}

std::vector<double> default_dense_grid(std::span<const double> frequencies) {
  if (frequencies.empty()) throw Error(ErrorKind::InvalidArgument, "no design frequencies");
  auto grid = log_grid(frequencies.front() / 10.0, 10.0 * frequencies.back(), 500);
  grid.insert(grid.end(), frequencies.begin(), frequencies.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

VerificationReport verify_design(const VerifyInputs& in, const PidGains& gains) {
  if (in.combined.size() != in.frequencies.size())
    throw Error(ErrorKind::InvalidArgument, "one bound curve per design frequency is required");
  VerificationReport report;
  for (std::size_t k = 0; k < in.frequencies.size(); ++k) {
    const double w = in.frequencies[k];
    const Complex go = in.nominal.at(w);
    const Complex loop = go * pid_frequency_response(gains, w);
    MarginRow row;
    row.omega = w;
    if (std::abs(loop) == 0.0) {
      row.loop_phase_deg = nichols_phase(go);
      row.loop_gain_db = -kInf;
    } else {
      row.loop_phase_deg = nichols_phase(loop);
      row.loop_gain_db = to_db(std::abs(loop));
    }
    row.bound = interpolate_bound(in.combined[k], row.loop_phase_deg);
    row.source = classify(in, k, row.loop_phase_deg, row.bound);
    if (row.bound.is_finite()) row.slack_db = row.loop_gain_db - row.bound.db();
    else if (row.bound.is_infeasible()) row.slack_db = -kInf;
    if (row.slack_db && *row.slack_db < -kSlackTolerance) {
      report.margins_ok = false;
      report.reasons.push_back(fmt::format("bound violated by {:.4f} dB at omega = {}", -*row.slack_db, w));
    }
    report.margins.push_back(row);
  }
  for (double w : in.dense_grid) {
    const Complex loop = in.nominal.at(w) * pid_frequency_response(gains, w);
    SweepRow row;
    row.omega = w;
    row.loop_gain_db = std::abs(loop) == 0.0 ? -kInf : to_db(std::abs(loop));
    row.loop_phase_deg = std::abs(loop) == 0.0 ? 0.0 : nichols_phase(loop);
    row.inside_ucontour = loop_inside(in.ucontour, loop);
    if (row.inside_ucontour) {
      if (report.sweep_ok) report.reasons.push_back(fmt::format("open loop enters the U-contour at omega = {}", w));
      report.sweep_ok = false;
    }
    report.dense_sweep.push_back(row);
  }
  return report;
}

std::vector<EnvelopeRow> closed_loop_envelope(const UncertainPlant& plant, const PidGains& gains,
                                              const RationalTransferFunction& prefilter,
                                              const TrackingSpec& tracking, std::span<const double> omegas,
                                              unsigned threads) {
  if (!is_hurwitz(prefilter.denominator()))
    throw Error(ErrorKind::UnstableModel, "prefilter is not stable");
  const auto samples = plant.parameter_grid();
  std::vector<double> t_db(samples.size() * omegas.size());
  parallel_for(samples.size(), threads, [&](std::size_t s) {
    const auto g = plant.instantiate(samples[s]);
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      const double w = omegas[i];
      const Complex loop = g.at(w) * pid_frequency_response(gains, w);
      t_db[s * omegas.size() + i] = to_db(std::abs(prefilter.at(w)) * closed_loop_gain(loop));
    }
  });
  std::vector<EnvelopeRow> rows;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    EnvelopeRow row;
    row.omega = omegas[i];
    row.min_db = kInf;
    row.max_db = -kInf;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      row.min_db = std::min(row.min_db, t_db[s * omegas.size() + i]);
      row.max_db = std::max(row.max_db, t_db[s * omegas.size() + i]);
    }
    std::tie(row.lower_db, row.upper_db) = tracking.corridor_db(omegas[i]);
    rows.push_back(row);
  }
  return rows;
}

RationalTransferFunction default_prefilter() { return {{26.25}, {1.0, 11.0, 26.25}}; }

std::size_t GainAxis::count() const {
  if (!(step > 0.0) || !(max >= min)) throw Error(ErrorKind::InvalidArgument, "invalid oracle axis");
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

bool gains_feasible(const DesignProblem& problem, const PidGains& gains) {
  for (std::size_t k = 0; k < problem.frequencies.size(); ++k) {
    const double w = problem.frequencies[k];
    const Complex loop = problem.nominal_responses[k] * pid_frequency_response(gains, w);
    const double mag = std::abs(loop);
    const double phase = mag == 0.0 ? nichols_phase(problem.nominal_responses[k]) : nichols_phase(loop);
    const BoundValue bound = problem.bound_at(k, phase);
    if (bound.is_no_constraint()) continue;
    if (bound.is_infeasible() || mag == 0.0 || to_db(mag) < bound.db()) return false;
  }
  if (problem.guard) {
    const auto& guard = *problem.guard;
    for (std::size_t i = 0; i < guard.omegas.size(); ++i)
      if (loop_inside(guard.contour, guard.nominal_responses[i] * pid_frequency_response(gains, guard.omegas[i])))
        return false;
  }
  return true;
}

OracleResult brute_force_design(const DesignProblem& problem, const OracleBox& box, unsigned threads) {
  if (problem.frequencies.empty() || problem.nominal_responses.size() != problem.frequencies.size() ||
      (problem.exact_bounds.empty() && problem.combined_bounds.size() != problem.frequencies.size()))
    throw Error(ErrorKind::InvalidArgument, "incomplete design problem");
  const std::size_t nkp = box.kp.count(), nki = box.ki.count(), nkd = box.kd.count();
  OracleResult result;
  result.box = box;
  struct RowHit {
    std::optional<std::size_t> kp_index;
    std::size_t evaluations = 0;
  };
  std::vector<RowHit> rows(nki);
  for (std::size_t d = 0; d < nkd; ++d) {
    const double kd = box.kd.at(d);
    parallel_for(nki, threads, [&](std::size_t i) {
      RowHit hit;
      const double ki = box.ki.at(i);
      for (std::size_t p = 0; p < nkp; ++p) {
        ++hit.evaluations;
        if (gains_feasible(problem, {box.kp.at(p), ki, kd})) {
          hit.kp_index = p;
          break;
        }
      }
      rows[i] = hit;
    });
    for (const auto& row : rows) result.evaluations += row.evaluations;
    for (std::size_t i = 0; i < nki; ++i)
      if (rows[i].kp_index) {
        result.best_gains = {box.kp.at(*rows[i].kp_index), box.ki.at(i), kd};
        result.best_kd = kd;
        return result;
      }
  }
  throw Error(ErrorKind::NoFeasiblePoint, "no grid point satisfies every constraint");
}

} // namespace qft
