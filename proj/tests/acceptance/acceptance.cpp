// Acceptance checks for the example problem. Prints one PASS/FAIL line per
// criterion; exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oracles.hpp"
#include "qft/config.hpp"
#include "qft/error.hpp"
#include "qft/pipeline.hpp"

using namespace qft;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

unsigned hw_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

DesignConfig example_config() { return load_config(QFT_SOURCE_DIR "/configs/qft_example.json"); }

bool in_range(double x, double lo, double hi) { return x >= lo && x <= hi; }

Outcome gains_in_band() {
  auto cfg = example_config();
  const auto start = Clock::now();
  Pipeline pipe(cfg, hw_threads());
  const auto gains = pipe.physical_gains();
  const double elapsed = seconds_since(start);
  if (!gains) return {false, "design infeasible: " + pipe.design().reason};
  const bool kp = in_range(gains->kp, 10.7, 14.5), ki = in_range(gains->ki, 3.8, 5.1),
             kd = in_range(gains->kd, 3.36, 4.54);
  const bool nonneg = gains->kp >= 0 && gains->ki >= 0 && gains->kd >= 0;
  return {kp && ki && kd && nonneg && elapsed < 60.0,
          fmt::format("kp={:.4f} [10.7,14.5] {} ki={:.4f} [3.8,5.1] {} kd={:.4f} [3.36,4.54] {} runtime={:.1f}s",
                      gains->kp, kp ? "ok" : "out", gains->ki, ki ? "ok" : "out", gains->kd, kd ? "ok" : "out",
                      elapsed)};
}

Outcome feasible_and_tight() {
  Pipeline pipe(example_config(), hw_threads());
  if (!pipe.design().feasible()) return {false, "design infeasible"};
  const auto& report = pipe.verify();
  double lo = INFINITY;
  std::string rows;
  for (const auto& m : report.margins) {
    if (!m.slack_db) continue;
    lo = std::min(lo, *m.slack_db);
    rows += fmt::format(" w={}:{:.3f}", m.omega, *m.slack_db);
  }
  const bool all_ok = lo >= -0.05;
  const bool tight = lo <= 0.1;
  return {all_ok && tight && report.sweep_ok,
          fmt::format("min slack {:.4f} dB (>= -0.05, <= 0.1), dense sweep {};{}", lo,
                      report.sweep_ok ? "clear" : "penetrates", rows)};
}

Outcome oracle_equivalence() {
  const auto cfg = load_config(QFT_SOURCE_DIR "/configs/qft_reduced.json");
  Pipeline pipe(cfg, hw_threads());
  const auto& design = pipe.design();
  if (!design.feasible()) return {false, "design infeasible"};
  const auto start = Clock::now();
  OracleResult best;
  try {
    best = brute_force_design(pipe.problem(), cfg.oracle.value_or(OracleBox{}), hw_threads());
  } catch (const Error& e) {
    return {false, std::string("oracle: ") + e.what()};
  }
  const double elapsed = seconds_since(start);
  const double kd = design.gains->kd;
  const double lo = best.best_kd - 0.05, hi = 1.05 * best.best_kd;
  return {in_range(kd, lo, hi) && elapsed < 600.0,
          fmt::format("kd={:.4f} oracle kd={:.4f} band [{:.4f}, {:.4f}] oracle runtime={:.1f}s ({} evaluations)", kd,
                      best.best_kd, lo, hi, elapsed, best.evaluations)};
}

Outcome m_circle_analytics() {
  const auto s = m_circle_gains(1.2, -180.0);
  if (!s) return {false, "no section at -180 deg"};
  const auto ref = oracle::m_circle(1.2, -180.0);
  const double exact_up = 20.0 * std::log10(6.0), exact_lo = 20.0 * std::log10(1.2 / 2.2);
  bool ok = std::abs(s->upper_db - exact_up) <= 1e-6 && std::abs(s->lower_db - exact_lo) <= 1e-6 &&
            std::abs(s->upper_db - ref->first) <= 1e-6 && std::abs(s->lower_db - ref->second) <= 1e-6 &&
            std::abs(s->upper_db - 15.563) <= 5e-4 && std::abs(s->lower_db + 5.265) <= 5e-4;

  const double edge = std::sqrt(0.30556);
  std::size_t inside = 0, wrong = 0, agree = 0;
  for (int i = 0; i < 360000; ++i) {
    const double phase = -360.0 + 0.001 * (i + 1);
    const double c = std::cos(phase * 3.141592653589793 / 180.0);
    const auto g = m_circle_gains(1.2, phase);
    if (std::abs(c) < edge) {
      ++inside;
      if (g) ++wrong;
    } else if (!g && oracle::m_circle(1.2, phase)) {
      ++wrong;
    } else if (g) {
      const auto r = oracle::m_circle(1.2, phase);
      if (r && std::abs(g->upper_db - r->first) <= 1e-6 && std::abs(g->lower_db - r->second) <= 1e-6) ++agree;
      else ++wrong;
    }
  }
  ok = ok && wrong == 0;
  return {ok, fmt::format("(-180 deg) = ({:.6f}, {:.6f}) dB; {} phases with |cos| < sqrt(0.30556) checked, {} "
                          "sections match the quadratic, {} mismatches",
                          s->upper_db, s->lower_db, inside, agree, wrong)};
}

Outcome kernel_properties() {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> psi(-89.9, 89.9), logw(-2.0, 3.0);
  double worst_residual = 0.0, worst_phase = 0.0, worst_oracle = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double pi = psi(rng), pj = psi(rng);
    const double wi = std::pow(10.0, logw(rng));
    double wj = std::pow(10.0, logw(rng));
    if (std::abs(wj / wi - 1.0) < 1e-3) wj = 2.0 * wi;
    const auto d = kernel_direction(pi, pj, wi, wj);
    const std::array<double, 3> v{d.v21, d.v22, d.v23};
    worst_residual = std::max({worst_residual, kernel_residual(d), oracle::residual(v, pi, pj, wi, wj)});
    const auto ref = oracle::kernel(pi, pj, wi, wj);
    worst_oracle = std::max(worst_oracle, 1.0 - std::abs(ref[0] * v[0] + ref[1] * v[1] + ref[2] * v[2]));
    const PidGains g{d.v23, d.v22, d.v21};
    worst_phase = std::max({worst_phase, std::abs(pid_gain_phase(g, wi).psi_deg - pi),
                            std::abs(pid_gain_phase(g, wj).psi_deg - pj),
                            std::abs(oracle::controller_phase(v, wi) - pi),
                            std::abs(oracle::controller_phase(v, wj) - pj)});
  }
  return {worst_residual <= 1e-10 && worst_phase <= 1e-6 && worst_oracle <= 1e-9,
          fmt::format("10000 samples: max |A v| = {:.3g}, max phase error = {:.3g} deg, max misalignment with the "
                      "cross-product kernel = {:.3g}",
                      worst_residual, worst_phase, worst_oracle)};
}

Outcome bisection_soundness() {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> gain(-10.0, 10.0), angle(-40.0, 40.0), delta(0.5, 15.0),
      phase(-359.0, 0.0);
  int finite = 0, failures = 0, drawn = 0;
  while (finite < 50 && drawn < 10000) {
    ++drawn;
    std::vector<Complex> ratios{{1.0, 0.0}};
    const int n = size(rng);
    for (int i = 1; i < n; ++i) ratios.push_back(std::polar(std::pow(10.0, gain(rng) / 20.0), angle(rng) * 3.141592653589793 / 180.0));
    const double d = delta(rng), p = phase(rng);
    BoundValue c = BoundValue::no_constraint();
    try {
      c = horowitz_gain(ratios, d, p);
    } catch (const Error&) {
      continue;
    }
    if (!c.is_finite()) continue;
    ++finite;
    if (!(oracle::closed_loop_spread(ratios, c.db() + 0.02, p) <= d)) ++failures;
    if (!(oracle::closed_loop_spread(ratios, c.db() - 0.5, p) > d)) ++failures;
  }
  return {finite == 50 && failures == 0,
          fmt::format("{} finite cases from {} draws, {} violations", finite, drawn, failures)};
}

Outcome envelope_in_corridor() {
  auto cfg = example_config();
  Pipeline pipe(cfg, hw_threads());
  if (!pipe.design().feasible()) return {false, "design infeasible"};
  const auto& report = pipe.verify();
  int outside = 0;
  std::string rows;
  for (const auto& r : report.envelope) {
    if (std::find(cfg.frequencies.begin(), cfg.frequencies.end(), r.omega) == cfg.frequencies.end()) continue;
    const double below = std::max(0.0, r.lower_db - r.min_db), above = std::max(0.0, r.max_db - r.upper_db);
    if (!r.within_corridor()) {
      ++outside;
      rows += fmt::format(" w={}: [{:.3f}, {:.3f}] vs corridor [{:.3f}, {:.3f}] (out by {:.3f} dB)", r.omega,
                          r.min_db, r.max_db, r.lower_db, r.upper_db, std::max(below, above));
    }
  }
  return {outside == 0, fmt::format("{} of {} design frequencies outside the corridor;{}", outside,
                                    cfg.frequencies.size(), rows)};
}

Outcome determinism() {
  const auto cfg = example_config();
  std::ostringstream log;
  RunOptions opts;
  opts.command = Command::All;
  opts.threads = 1;
  const auto a = run_pipeline(cfg, opts, log);
  const auto b = run_pipeline(cfg, opts, log);
  opts.threads = hw_threads() > 1 ? hw_threads() : 4;
  const auto c = run_pipeline(cfg, opts, log);
  const auto d = run_pipeline(cfg, opts, log);
  std::size_t compared = 0, differing = 0;
  for (const auto& [name, text] : a.artifacts) {
    if (!name.ends_with(".csv") && !name.ends_with(".svg")) continue;
    ++compared;
    for (const auto* other : {&b, &c, &d}) {
      const auto it = other->artifacts.find(name);
      if (it == other->artifacts.end() || it->second != text) {
        ++differing;
        break;
      }
    }
  }
  return {compared > 0 && differing == 0,
          fmt::format("{} CSV/SVG artifacts over 4 runs (1 and {} threads), {} differ", compared, opts.threads,
                      differing)};
}

const char* const kNames[] = {"",
                              "example design gains within 15% band",
                              "feasibility and tightness",
                              "optimizer vs exhaustive search",
                              "M-circle analytics",
                              "kernel properties",
                              "bisection soundness",
                              "closed-loop envelope",
                              "determinism"};

Outcome run(int criterion) {
  switch (criterion) {
  case 1: return gains_in_band();
  case 2: return feasible_and_tight();
  case 3: return oracle_equivalence();
  case 4: return m_circle_analytics();
  case 5: return kernel_properties();
  case 6: return bisection_soundness();
  case 7: return envelope_in_corridor();
  case 8: return determinism();
  default: return {false, "unknown criterion"};
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (int c = 1; c <= 8; ++c) {
    if (only != 0 && c != only) continue;
    Outcome o;
    try {
      o = run(c);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    fmt::print("{} criterion {} ({}): {}\n", o.pass ? "PASS" : "FAIL", c, kNames[c], o.detail);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
