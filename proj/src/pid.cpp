#include "qft/pid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "qft/error.hpp"
#include "qft/parallel.hpp"

namespace qft {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroComponent = 1e-12;

// Direction with near-zero components snapped to zero and flipped so the
// nonzero components are positive; nullopt when signs are mixed.
std::optional<std::array<double, 3>> same_sign_direction(double a, double b, double c) {
  std::array<double, 3> v{a, b, c};
  bool pos = false, neg = false;
  for (double& x : v) {
    if (std::abs(x) <= kZeroComponent) x = 0.0;
    else if (x > 0) pos = true;
    else neg = true;
  }
  if (pos && neg) return std::nullopt;
  if (neg)
    for (double& x : v) x = -x;
  return v;
}

} // namespace

Complex pid_frequency_response(const PidGains& g, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  return {g.kp, g.kd * omega - g.ki / omega};
}

GainPhase pid_gain_phase(const PidGains& g, double omega) {
  if (g.kp == 0.0 && g.ki == 0.0 && g.kd == 0.0) throw Error(ErrorKind::ZeroController, "all gains are zero");
  const Complex k = pid_frequency_response(g, omega);
  const double x = k.imag();
  double psi = 0.0;
  if (g.kp != 0.0) psi = rad_to_deg(std::atan(x / g.kp));
  else if (x != 0.0) psi = x > 0 ? 90.0 : -90.0;
  return {std::hypot(g.kp, x), psi};
}

std::vector<std::size_t> phase_window(double nominal_phase_deg, std::span<const double> grid) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - nominal_phase_deg) < 90.0) out.push_back(i);
  if (out.empty())
    throw Error(ErrorKind::EmptyWindow,
                fmt::format("no grid phase within 90 deg of the nominal phase {}", nominal_phase_deg));
  return out;
}

KernelDirection kernel_direction(double psi_i_deg, double psi_j_deg, double omega_i, double omega_j) {
  if (!(omega_i > 0.0) || !(omega_j > 0.0) || omega_i == omega_j)
    throw Error(ErrorKind::InvalidArgument, "anchor frequencies must be distinct and positive");
  if (!(std::abs(psi_i_deg) < 90.0) || !(std::abs(psi_j_deg) < 90.0))
    throw Error(ErrorKind::InvalidArgument, "anchor phases must lie strictly inside (-90, 90)");
  Eigen::Matrix<double, 2, 3> a;
  a << 1.0, -1.0 / (omega_i * omega_i), -std::tan(deg_to_rad(psi_i_deg)) / omega_i,
      1.0, -1.0 / (omega_j * omega_j), -std::tan(deg_to_rad(psi_j_deg)) / omega_j;
  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(1) > 1e-12 * s(0))) throw Error(ErrorKind::RankDeficient, "phase-constraint rows are dependent");
  Eigen::Vector3d v = svd.matrixV().col(2);
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  if (v(largest) < 0) v = -v;
  return {v(0), v(1), v(2), psi_i_deg, psi_j_deg, omega_i, omega_j};
}

double kernel_residual(const KernelDirection& d) {
  auto row = [&](double psi, double w) {
    return d.v21 - d.v22 / (w * w) - d.v23 * std::tan(deg_to_rad(psi)) / w;
  };
  return std::hypot(row(d.psi_i_deg, d.omega_i), row(d.psi_j_deg, d.omega_j));
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw Error(ErrorKind::InvalidArgument, "invalid log grid");
  std::vector<double> out(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> guard_frequency_grid(double first_design_omega, double last_design_omega) {
  auto grid = log_grid(first_design_omega / 10.0, 10.0 * last_design_omega, 500);
  const auto tail = log_grid(10.0 * last_design_omega, 1e4 * last_design_omega, 151);
  grid.insert(grid.end(), tail.begin() + 1, tail.end());
  return grid;
}

StabilityGuard make_stability_guard(const RationalTransferFunction& nominal, UContour contour,
                                    double first_design_omega, double last_design_omega) {
  StabilityGuard guard{std::move(contour), guard_frequency_grid(first_design_omega, last_design_omega), {}};
  guard.nominal_responses.reserve(guard.omegas.size());
  for (double w : guard.omegas) guard.nominal_responses.push_back(nominal.at(w));
  return guard;
}

std::optional<double> guard_scale(const StabilityGuard& guard, double v21, double v22, double v23, double lambda0) {
  struct Interval {
    double lo, hi;
  };
  std::vector<Interval> forbidden;
  const std::size_t n = guard.omegas.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = guard.omegas[i];
    const Complex k{v23, v21 * w - v22 / w};
    const Complex loop = guard.nominal_responses[i] * k;
    const double gv = std::abs(loop);
    if (gv == 0.0) continue;
    const auto band = guard.contour.gain_band(nichols_phase(loop));
    if (!band) continue;
    if (i + 1 == n) return std::nullopt;
    forbidden.push_back({from_db(band->first) / gv, from_db(band->second) / gv});
  }
  std::sort(forbidden.begin(), forbidden.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double lambda = lambda0;
  for (const auto& iv : forbidden) {
    if (iv.lo >= lambda) break;
    if (iv.hi > lambda) lambda = iv.hi * (1.0 + 1e-9);
  }
  return lambda;
}

void DesignProblem::validate() const {
  const std::size_t n = frequencies.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "at least two design frequencies are required");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(frequencies[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "frequencies must be positive");
    if (i > 0 && !(frequencies[i] > frequencies[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "frequencies must be strictly increasing");
  }
  if (nominal_responses.size() != n || combined_bounds.size() != n)
    throw Error(ErrorKind::InvalidArgument, "one nominal response and one bound curve per frequency are required");
  if (!exact_bounds.empty() && exact_bounds.size() != n)
    throw Error(ErrorKind::InvalidArgument, "exact bounds must cover every frequency");
  const auto [k, l] = pair_indices;
  if (k >= n || l >= n || k == l) throw Error(ErrorKind::InvalidArgument, "pair indices must be distinct and valid");
  if (phase_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty phase grid");
}

BoundValue DesignProblem::bound_at(std::size_t k, double phase_deg) const {
  if (!exact_bounds.empty()) return exact_bounds[k].at(phase_deg);
  return interpolate_bound(combined_bounds[k], phase_deg);
}

std::pair<std::size_t, std::size_t> default_pair(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "at least two design frequencies are required");
  if (n >= 3 && n - 3 != 1) return {1, n - 3};
  return {0, n - 1};
}

ScalingBound beta_scaling(double v21, double v22, double v23, const DesignProblem& problem) {
  ScalingBound out;
  double best = -kInf;
  for (std::size_t k = 0; k < problem.frequencies.size(); ++k) {
    const double w = problem.frequencies[k];
    const Complex go = problem.nominal_responses[k];
    const double x = v21 * w - v22 / w;
    const double phase = wrap_phase(rad_to_deg(std::arg(go)) + rad_to_deg(std::atan2(x, v23)));
    const BoundValue bound = problem.bound_at(k, phase);
    if (bound.is_no_constraint()) continue;
    const double dir_db = 10.0 * std::log10(v23 * v23 + x * x);
    if (bound.is_infeasible() || !std::isfinite(dir_db)) {
      out.status = ScalingBound::Status::Infeasible;
      out.active_index = k;
      return out;
    }
    const double term = bound.db() - to_db(std::abs(go)) - dir_db;
    if (term > best) {
      best = term;
      out.active_index = k;
    }
  }
  if (best == -kInf) return out;
  out.status = ScalingBound::Status::Finite;
  out.beta_db = best;
  return out;
}

std::optional<PidGains> candidate_from_kernel(const KernelDirection& dir, double beta_db) {
  std::array<double, 3> raw{dir.v21, dir.v22, dir.v23};
  bool pos = false, neg = false;
  for (double& x : raw) {
    if (std::abs(x) <= kZeroComponent) x = 0.0;
    else (x > 0 ? pos : neg) = true;
  }
  if (pos && neg) return std::nullopt;
  const double q = neg ? -1.0 : 1.0;
  const double lambda = q * from_db(beta_db);
  return PidGains{lambda * raw[2], lambda * raw[1], lambda * raw[0]};
}

std::vector<FrequencyMargin> margin_report(const DesignProblem& problem, const PidGains& gains) {
  std::vector<FrequencyMargin> out;
  for (std::size_t k = 0; k < problem.frequencies.size(); ++k) {
    const double w = problem.frequencies[k];
    const Complex loop = problem.nominal_responses[k] * pid_frequency_response(gains, w);
    FrequencyMargin m;
    m.omega = w;
    if (std::abs(loop) == 0.0) {
      m.loop_phase_deg = nichols_phase(problem.nominal_responses[k]);
      m.loop_gain_db = -kInf;
    } else {
      m.loop_phase_deg = nichols_phase(loop);
      m.loop_gain_db = to_db(std::abs(loop));
    }
    m.bound = problem.bound_at(k, m.loop_phase_deg);
    if (m.bound.is_finite()) m.slack_db = m.loop_gain_db - m.bound.db();
    else if (m.bound.is_infeasible()) m.slack_db = -kInf;
    out.push_back(m);
  }
  return out;
}

namespace {

struct Cell {
  bool evaluated = false;
  bool accepted = false;
  bool unconstrained = false;
  PidGains gains;
  double objective = kInf;
  double factor = 1.0;
  std::size_t active = 0;
};

// Scales a non-negative direction by beta and, when configured, lifts the
// scale until the nominal loop stays out of the U-contour.
void finish_cell(const DesignProblem& problem, const std::array<double, 3>& v, Cell& cell) {
  const ScalingBound beta = beta_scaling(v[0], v[1], v[2], problem);
  cell.evaluated = true;
  if (beta.status != ScalingBound::Status::Finite) {
    cell.unconstrained = beta.status == ScalingBound::Status::Unconstrained;
    return;
  }
  const double lambda0 = from_db(beta.beta_db);
  double lambda = lambda0;
  if (problem.guard) {
    const auto scaled = guard_scale(*problem.guard, v[0], v[1], v[2], lambda0);
    if (!scaled) return;
    lambda = *scaled;
  }
  cell.accepted = true;
  cell.gains = {lambda * v[2], lambda * v[1], lambda * v[0]};
  cell.factor = lambda / lambda0;
  cell.active = beta.active_index;
}

std::string rejection_reason(std::span<const Cell> cells) {
  const bool any_constrained = std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return c.evaluated && !c.unconstrained; });
  if (!any_constrained) return "no binding constraint";
  return "constraints cannot be satisfied by a controller with non-negative gains";
}

} // namespace

DesignResult design_pid(const DesignProblem& problem) {
  problem.validate();
  const auto [k, l] = problem.pair_indices;
  const double wk = problem.frequencies[k];
  const double wl = problem.frequencies[l];
  const double gk = nichols_phase(problem.nominal_responses[k]);
  const double gl = nichols_phase(problem.nominal_responses[l]);
  const auto win_k = phase_window(gk, problem.phase_grid);
  const auto win_l = phase_window(gl, problem.phase_grid);
  const std::size_t m = win_k.size(), n = win_l.size();

  std::vector<Cell> cells(m * n);
  parallel_for(m, problem.threads, [&](std::size_t i) {
    const double psi_i = problem.phase_grid[win_k[i]] - gk;
    for (std::size_t j = 0; j < n; ++j) {
      const double psi_j = problem.phase_grid[win_l[j]] - gl;
      Cell& cell = cells[i * n + j];
      KernelDirection dir;
      try {
        dir = kernel_direction(psi_i, psi_j, wk, wl);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RankDeficient) throw;
        continue;
      }
      const auto v = same_sign_direction(dir.v21, dir.v22, dir.v23);
      if (!v) continue;
      finish_cell(problem, *v, cell);
      if (cell.accepted) cell.objective = cell.gains.kd;
    }
  });

  DesignResult result;
  for (std::size_t i : win_k) result.window_k.push_back(problem.phase_grid[i]);
  for (std::size_t j : win_l) result.window_l.push_back(problem.phase_grid[j]);
  result.kd_grid.assign(m, std::vector<double>(n, kInf));
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].accepted) continue;
    ++result.accepted_cells;
    result.kd_grid[c / n][c % n] = cells[c].objective;
    if (!best || cells[c].objective < cells[*best].objective) best = c;
  }
  if (!best) {
    result.reason = rejection_reason(cells);
    return result;
  }
  const Cell& cell = cells[*best];
  result.gains = cell.gains;
  result.chosen_phases = {result.window_k[*best / n], result.window_l[*best % n]};
  result.active_index = cell.active;
  result.guard_factor = cell.factor;
  result.margins = margin_report(problem, cell.gains);
  result.reason = "optimal";
  return result;
}

DesignResult design_pi_pd(const DesignProblem& problem, ControllerKind kind, std::size_t anchor_index) {
  if (kind == ControllerKind::Pid) return design_pid(problem);
  if (problem.frequencies.empty() || anchor_index >= problem.frequencies.size())
    throw Error(ErrorKind::InvalidArgument, "anchor frequency index out of range");
  const double w = problem.frequencies[anchor_index];
  const double g = nichols_phase(problem.nominal_responses[anchor_index]);
  const auto window = phase_window(g, problem.phase_grid);

  std::vector<Cell> cells(window.size());
  parallel_for(window.size(), problem.threads, [&](std::size_t i) {
    const double psi = problem.phase_grid[window[i]] - g;
    const double t = std::tan(deg_to_rad(psi));
    std::array<double, 3> v;
    if (kind == ControllerKind::Pi) {
      if (psi > 0.0) return;
      v = {0.0, -w * t, 1.0};
    } else {
      if (psi < 0.0) return;
      v = {t / w, 0.0, 1.0};
    }
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& x : v) x /= norm;
    Cell& cell = cells[i];
    finish_cell(problem, v, cell);
    if (cell.accepted) cell.objective = kind == ControllerKind::Pi ? cell.gains.kp : cell.gains.kd;
  });

  DesignResult result;
  for (std::size_t i : window) result.window_k.push_back(problem.phase_grid[i]);
  result.kd_grid.assign(1, std::vector<double>(window.size(), kInf));
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].accepted) continue;
    ++result.accepted_cells;
    result.kd_grid[0][i] = cells[i].objective;
    if (!best || cells[i].objective < cells[*best].objective) best = i;
  }
  if (!best) {
    result.reason = rejection_reason(cells);
    return result;
  }
  const Cell& cell = cells[*best];
  result.gains = cell.gains;
  result.chosen_phases = {result.window_k[*best], result.window_k[*best]};
  result.active_index = cell.active;
  result.guard_factor = cell.factor;
  result.margins = margin_report(problem, cell.gains);
  result.reason = "optimal";
  return result;
}

PidGains GainMap::to_augmented(const PidGains& g) const {
  return {g.kp + g.ki * tau, g.ki, g.kd + g.kp * tau};
}

PidGains GainMap::to_physical(const PidGains& g) const {
  auto settle = [](double value, double scale, const char* name) {
    if (value >= 0.0) return value;
    if (value > -1e-12 * std::max(1.0, scale)) return 0.0;
    throw Error(ErrorKind::NegativeMappedGain, fmt::format("mapped-back {} is negative ({})", name, value));
  };
  const double kp = settle(g.kp - g.ki * tau, g.kp, "kp");
  const double kd = settle(g.kd - kp * tau, g.kd, "kd");
  return {kp, settle(g.ki, g.ki, "ki"), kd};
}

std::pair<UncertainPlant, GainMap> filtered_derivative_transform(const UncertainPlant& plant, double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be non-negative");
  if (tau == 0.0) return {plant, GainMap{0.0}};
  return {plant.with_denominator_lag(tau), GainMap{tau}};
}

} // namespace qft
