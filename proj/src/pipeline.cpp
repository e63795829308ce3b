#include "qft/pipeline.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "qft/csv.hpp"
#include "qft/error.hpp"
#include "qft/svg.hpp"

namespace qft {

namespace {

std::string num(double v) { return format_number(v); }

std::string slack_text(const std::optional<double>& s) { return s ? num(*s) : "NO_CONSTRAINT"; }

std::pair<UncertainPlant, GainMap> design_plant(const DesignConfig& cfg) {
  const UncertainPlant base = cfg.plant.build();
  if (!cfg.tau) return {base, GainMap{0.0}};
  return filtered_derivative_transform(base, *cfg.tau);
}

std::string design_report(Pipeline& p) {
  const auto& cfg = p.config();
  const auto& problem = p.problem();
  const auto& r = p.design();
  std::string out;
  out += fmt::format("controller: {}\n", to_string(cfg.controller));
  out += fmt::format("status: {}\n", r.feasible() ? "feasible" : "infeasible");
  out += fmt::format("reason: {}\n", r.reason);
  if (cfg.controller == ControllerKind::Pid)
    out += fmt::format("pair: omega_k = {}, omega_l = {}\n", num(problem.frequencies[problem.pair_indices.first]),
                       num(problem.frequencies[problem.pair_indices.second]));
  out += fmt::format("phase_grid_points: {}\n", problem.phase_grid.size());
  out += fmt::format("accepted_cells: {}\n", r.accepted_cells);
  if (!r.feasible()) return out;
  const auto physical = p.physical_gains();
  out += fmt::format("kp: {}\nki: {}\nkd: {}\n", num(physical->kp), num(physical->ki), num(physical->kd));
  if (cfg.tau)
    out += fmt::format("tau: {}\nkp_augmented: {}\nki_augmented: {}\nkd_augmented: {}\n", num(*cfg.tau),
                       num(r.gains->kp), num(r.gains->ki), num(r.gains->kd));
  out += fmt::format("chosen_phases_deg: {}, {}\n", num(r.chosen_phases.first), num(r.chosen_phases.second));
  if (r.active_index) out += fmt::format("active_frequency: {}\n", num(problem.frequencies[*r.active_index]));
  out += fmt::format("guard_factor: {}\n", num(r.guard_factor));
  out += "margins:\n  omega, loop_phase_deg, loop_gain_db, bound_db, slack_db\n";
  for (const auto& m : r.margins)
    out += fmt::format("  {}, {}, {}, {}, {}\n", num(m.omega), num(m.loop_phase_deg), num(m.loop_gain_db),
                       format_bound(m.bound), slack_text(m.slack_db));
  return out;
}

std::string oracle_report(const OracleOutcome& o) {
  if (!o.result) return fmt::format("oracle:\n  status: {}\n", o.failure);
  const auto& r = *o.result;
  return fmt::format("oracle:\n  kp: {}\n  ki: {}\n  kd: {}\n  evaluations: {}\n", num(r.best_gains.kp),
                     num(r.best_gains.ki), num(r.best_gains.kd), r.evaluations);
}

std::string kd_grid_csv(const DesignResult& r) {
  CsvWriter csv({"phase_k_deg", "phase_l_deg", "objective"});
  for (std::size_t i = 0; i < r.kd_grid.size(); ++i)
    for (std::size_t j = 0; j < r.kd_grid[i].size(); ++j) {
      const double pk = r.window_k.empty() ? 0.0 : r.window_k[r.window_l.empty() ? j : i];
      const double pl = r.window_l.empty() ? pk : r.window_l[j];
      csv.row({num(pk), num(pl), num(r.kd_grid[i][j])});
    }
  return csv.text();
}

std::string verify_report(const VerificationReport& v) {
  std::string out;
  out += fmt::format("verdict: {}\n", v.pass() ? "pass" : "fail");
  out += fmt::format("margins_ok: {}\nsweep_ok: {}\nenvelope_ok: {}\n", v.margins_ok, v.sweep_ok,
                     v.envelope_ok ? (*v.envelope_ok ? "true" : "false") : "not checked");
  out += "margins:\n  omega, loop_phase_deg, loop_gain_db, bound_db, slack_db, source\n";
  for (const auto& m : v.margins)
    out += fmt::format("  {}, {}, {}, {}, {}, {}\n", num(m.omega), num(m.loop_phase_deg), num(m.loop_gain_db),
                       format_bound(m.bound), slack_text(m.slack_db),
                       m.source == BoundSource::UContour ? "ucontour" : "performance");
  std::size_t inside = 0;
  for (const auto& s : v.dense_sweep) inside += s.inside_ucontour;
  out += fmt::format("dense_sweep: {} frequencies, {} inside the U-contour\n", v.dense_sweep.size(), inside);
  if (!v.envelope.empty()) {
    out += "envelope:\n  omega, min_db, max_db, lower_db, upper_db, inside\n";
    for (const auto& e : v.envelope)
      out += fmt::format("  {}, {}, {}, {}, {}, {}\n", num(e.omega), num(e.min_db), num(e.max_db), num(e.lower_db),
                         num(e.upper_db), e.within_corridor());
  }
  if (!v.reasons.empty()) {
    out += "reasons:\n";
    for (const auto& r : v.reasons) out += fmt::format("  - {}\n", r);
  }
  return out;
}

std::string ucontour_csv(const UContour& u) {
  CsvWriter csv({"phase_deg", "upper_db", "lower_db", "bottom_db"});
  for (std::size_t i = 0; i < u.phase_grid.size(); ++i) {
    if (!u.sections[i]) continue;
    const auto& s = *u.sections[i];
    csv.row({num(u.phase_grid[i]), num(s.upper_db), num(s.lower_db), num(u.bottom_db(s))});
  }
  return csv.text();
}

NicholsPoint nichols_or_floor(Complex value) {
  if (std::abs(value) == 0.0) return {0.0, -std::numeric_limits<double>::infinity()};
  return to_nichols(value);
}

std::string nichols_svg(Pipeline& p, bool with_bounds, bool with_loop) {
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const auto& freqs = p.config().frequencies;
  const auto nominal = p.plant().nominal_tf();
  NicholsChart chart;
  chart.title = "Nichols chart";

  const auto& tpls = p.templates();
  for (std::size_t k = 0; k < tpls.size(); ++k) {
    const NicholsPoint base = to_nichols(nominal.at(freqs[k]));
    NicholsSeries s{"templates", "#999999", {}, true, false};
    for (const auto& h : tpls[k].hull) s.points.emplace_back(base.phase_deg + h.x, base.gain_db + h.y);
    chart.series.push_back(std::move(s));
  }
  if (with_bounds) {
    const auto& b = p.bounds();
    for (std::size_t k = 0; k < b.combined.size(); ++k) {
      NicholsSeries s{fmt::format("bound w={}", num(freqs[k])), palette[k % 8], {}, false, false};
      for (std::size_t i = 0; i < b.phase_grid.size(); ++i) {
        const auto& v = b.combined[k].min_gain_db[i];
        s.points.emplace_back(b.phase_grid[i], v.is_finite() ? v.db() : std::numeric_limits<double>::infinity());
      }
      chart.series.push_back(std::move(s));
    }
    NicholsSeries upper{"U-contour", "#000000", {}, false, true};
    NicholsSeries bottom{"U-contour", "#000000", {}, false, true};
    for (std::size_t i = 0; i < b.ucontour.phase_grid.size(); ++i) {
      if (!b.ucontour.sections[i]) continue;
      upper.points.emplace_back(b.ucontour.phase_grid[i], b.ucontour.sections[i]->upper_db);
      bottom.points.emplace_back(b.ucontour.phase_grid[i], b.ucontour.bottom_db(*b.ucontour.sections[i]));
    }
    chart.series.push_back(std::move(upper));
    chart.series.push_back(std::move(bottom));
  }

  const auto dense = default_dense_grid(freqs);
  NicholsSeries plant_curve{"nominal plant", "#17becf", {}, false, true};
  for (double w : dense) plant_curve.points.push_back(nichols_or_floor(nominal.at(w)));
  chart.series.push_back(std::move(plant_curve));
  for (double w : freqs)
    chart.markers.push_back({to_nichols(nominal.at(w)), fmt::format("plant w={}", num(w)), "marker-plant", "#17becf"});

  if (with_loop && p.design().feasible()) {
    const PidGains g = *p.design().gains;
    NicholsSeries loop{"open loop", "#d62728", {}, false, false};
    for (double w : dense) loop.points.push_back(nichols_or_floor(nominal.at(w) * pid_frequency_response(g, w)));
    chart.series.push_back(std::move(loop));
    for (double w : freqs)
      chart.markers.push_back({nichols_or_floor(nominal.at(w) * pid_frequency_response(g, w)),
                               fmt::format("loop w={}", num(w)), "marker-loop", "#d62728"});
  }
  return emit_nichols_svg(chart);
}

} // namespace

Pipeline::Pipeline(DesignConfig config, unsigned threads)
    : config_(std::move(config)),
      threads_(threads),
      plant_(design_plant(config_).first),
      gain_map_(design_plant(config_).second),
      tracking_(config_.tracking_lower.build(), config_.tracking_upper.build()) {}

const std::vector<Template>& Pipeline::templates() {
  if (!templates_) {
    std::vector<Template> out(config_.frequencies.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = generate_template(plant_, config_.frequencies[k]);
    templates_ = std::move(out);
  }
  return *templates_;
}

const BoundSet& Pipeline::bounds() {
  if (bounds_) return *bounds_;
  const auto& tpls = templates();
  BoundSet b;
  b.phase_grid = make_phase_grid(config_.phase_grid_count);
  b.delta_hf_db = config_.delta_hf_db ? *config_.delta_hf_db : tpls.back().gain_span_db();
  b.ucontour = u_contour(config_.m_value, b.delta_hf_db, b.phase_grid);
  for (std::size_t k = 0; k < tpls.size(); ++k) {
    const double w = config_.frequencies[k];
    const double delta = delta_spread(tracking_, w);
    b.deltas.push_back(delta);
    b.tracking.push_back(horowitz_bound(tpls[k], delta, b.phase_grid, config_.bisection, config_.use_hull, threads_));
    BoundCurve perf = b.tracking.back();
    if (auto it = config_.disturbance_caps.find(w); it != config_.disturbance_caps.end()) {
      const auto d = disturbance_bound(tpls[k], it->second, b.phase_grid, config_.bisection, config_.use_hull, threads_);
      perf = performance_bound(b.tracking.back(), &d);
    }
    b.performance.push_back(perf);
    b.combined.push_back(combine_with_ucontour(perf, b.ucontour));
  }
  bounds_ = std::move(b);
  return *bounds_;
}

const DesignProblem& Pipeline::problem() {
  if (problem_) return *problem_;
  const auto& b = bounds();
  const auto nominal = plant_.nominal_tf();
  DesignProblem p;
  p.frequencies = config_.frequencies;
  for (double w : p.frequencies) p.nominal_responses.push_back(nominal.at(w));
  p.combined_bounds = b.combined;
  p.phase_grid = b.phase_grid;
  p.pair_indices = config_.pair ? std::pair<std::size_t, std::size_t>(config_.pair->first - 1, config_.pair->second - 1)
                                : default_pair(p.frequencies.size());
  if (config_.exact_bound_recompute) {
    const auto& tpls = templates();
    for (std::size_t k = 0; k < tpls.size(); ++k) {
      FrequencyConstraint c;
      c.omega = p.frequencies[k];
      c.ratios = template_ratios(tpls[k], config_.use_hull);
      c.delta_db = b.deltas[k];
      if (auto it = config_.disturbance_caps.find(c.omega); it != config_.disturbance_caps.end())
        c.disturbance_cap = it->second;
      c.ucontour = b.ucontour;
      c.options = config_.bisection;
      p.exact_bounds.push_back(std::move(c));
    }
  }
  if (config_.stability_sweep)
    p.guard = make_stability_guard(nominal, b.ucontour, p.frequencies.front(), p.frequencies.back());
  p.threads = threads_;
  problem_ = std::move(p);
  return *problem_;
}

const DesignResult& Pipeline::design() {
  if (design_) return *design_;
  const auto& p = problem();
  if (config_.controller == ControllerKind::Pid) {
    design_ = design_pid(p);
  } else {
    const std::size_t anchor = config_.anchor ? static_cast<std::size_t>(*config_.anchor - 1) : p.pair_indices.first;
    design_ = design_pi_pd(p, config_.controller, anchor);
  }
  return *design_;
}

std::optional<PidGains> Pipeline::physical_gains() {
  const auto& r = design();
  if (!r.gains) return std::nullopt;
  return config_.tau ? gain_map_.to_physical(*r.gains) : *r.gains;
}

const VerificationReport& Pipeline::verify() {
  if (verify_) return *verify_;
  const auto& r = design();
  if (!r.gains) throw Error(ErrorKind::NoFeasiblePoint, "no design to verify");
  const auto& b = bounds();
  VerifyInputs in{plant_.nominal_tf(), config_.frequencies, b.combined, b.performance, b.ucontour,
                  default_dense_grid(config_.frequencies)};
  VerificationReport report = verify_design(in, *r.gains);
  const auto prefilter = config_.prefilter ? config_.prefilter->build() : default_prefilter();
  report.attach_envelope(closed_loop_envelope(plant_, *r.gains, prefilter, tracking_, config_.frequencies, threads_));
  verify_ = std::move(report);
  return *verify_;
}

OracleOutcome Pipeline::run_oracle() {
  OracleOutcome out;
  try {
    out.result = brute_force_design(problem(), config_.oracle.value_or(OracleBox{}), threads_);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoFeasiblePoint) throw;
    out.failure = e.what();
  }
  return out;
}

std::optional<Command> parse_command(std::string_view text) {
  if (text == "templates") return Command::Templates;
  if (text == "bounds") return Command::Bounds;
  if (text == "design") return Command::Design;
  if (text == "verify") return Command::Verify;
  if (text == "all") return Command::All;
  return std::nullopt;
}

DesignConfig apply_overrides(DesignConfig config, const RunOptions& options) {
  if (options.phase_grid_count) config.phase_grid_count = *options.phase_grid_count;
  if (options.pair) config.pair = options.pair;
  validate(config);
  return config;
}

std::string templates_csv(const UncertainPlant& plant, const std::vector<Template>& templates) {
  std::vector<std::string> header{"omega"};
  for (const auto& p : plant.parameters()) header.push_back(p.name);
  header.insert(header.end(), {"phase_deg", "gain_db", "on_hull"});
  CsvWriter csv(header);
  for (const auto& t : templates)
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      std::vector<std::string> row{num(t.omega)};
      for (double v : t.points[i].parameters) row.push_back(num(v));
      const auto rel = relative_nichols(t.points[i].ratio);
      const bool on_hull = std::find(t.hull_indices.begin(), t.hull_indices.end(), i) != t.hull_indices.end();
      row.insert(row.end(), {num(rel.x), num(rel.y), on_hull ? "1" : "0"});
      csv.row(row);
    }
  return csv.text();
}

std::string bounds_csv(const std::vector<BoundCurve>& curves) {
  CsvWriter csv({"omega", "phase_deg", "min_gain_db"});
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.phase_grid.size(); ++i)
      csv.row({num(c.omega), num(c.phase_grid[i]), format_bound(c.min_gain_db[i])});
  return csv.text();
}

std::string envelope_csv(const std::vector<EnvelopeRow>& rows) {
  CsvWriter csv({"omega", "min_db", "max_db", "lower_db", "upper_db"});
  for (const auto& r : rows) csv.row({num(r.omega), num(r.min_db), num(r.max_db), num(r.lower_db), num(r.upper_db)});
  return csv.text();
}

RunOutcome run_pipeline(const DesignConfig& config, const RunOptions& options, std::ostream& log) {
  Pipeline p(config, options.threads);
  RunOutcome out;
  const int stage = static_cast<int>(options.command);

  out.artifacts["templates.csv"] = templates_csv(p.plant(), p.templates());
  log << fmt::format("templates: {} frequencies\n", p.templates().size());
  if (stage >= static_cast<int>(Command::Bounds)) {
    out.artifacts["bounds.csv"] = bounds_csv(p.bounds().combined);
    out.artifacts["performance_bounds.csv"] = bounds_csv(p.bounds().performance);
    out.artifacts["ucontour.csv"] = ucontour_csv(p.bounds().ucontour);
    log << fmt::format("bounds: {} phases, high-frequency translation {:.4f} dB\n", p.bounds().phase_grid.size(),
                       p.bounds().delta_hf_db);
  }
  bool with_loop = false;
  if (stage >= static_cast<int>(Command::Design)) {
    const auto& r = p.design();
    std::string report = design_report(p);
    if (options.oracle) report += oracle_report(p.run_oracle());
    out.artifacts["design_report.txt"] = report;
    out.artifacts["kd_grid.csv"] = kd_grid_csv(r);
    if (!r.feasible()) {
      log << "design: infeasible (" << r.reason << ")\n";
      out.exit_code = exit_code::infeasible;
    } else {
      const auto g = *p.physical_gains();
      log << fmt::format("design: kp = {:.4f}, ki = {:.4f}, kd = {:.4f}\n", g.kp, g.ki, g.kd);
      with_loop = true;
    }
  }
  if (stage >= static_cast<int>(Command::Verify) && out.exit_code == exit_code::success) {
    const auto& v = p.verify();
    out.artifacts["verify_report.txt"] = verify_report(v);
    out.artifacts["envelope.csv"] = envelope_csv(v.envelope);
    log << "verify: " << (v.pass() ? "pass" : "fail") << "\n";
    for (const auto& reason : v.reasons) log << "  " << reason << "\n";
    if (!v.pass()) out.exit_code = exit_code::verification_failed;
  }
  out.artifacts["nichols.svg"] = nichols_svg(p, stage >= static_cast<int>(Command::Bounds), with_loop);
  return out;
}

int run_command(const DesignConfig& config, const RunOptions& options, std::ostream& log) {
  const RunOutcome out = run_pipeline(config, options, log);
  std::filesystem::create_directories(options.out_dir);
  for (const auto& [name, text] : out.artifacts) {
    std::ofstream file(options.out_dir / name, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", (options.out_dir / name).string()));
    file << text;
  }
  return out.exit_code;
}

} // namespace qft
