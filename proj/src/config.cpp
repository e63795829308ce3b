#include "qft/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qft/error.hpp"

namespace qft {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigError, fmt::format("{}: {}", path, what));
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(join(path, key), "unknown field");
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

std::vector<double> numbers(const json& v, const std::string& path) {
  std::vector<double> out;
  const auto& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_number(arr[i], index(path, i)));
  return out;
}

std::string expression_text(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return fmt::format("{}", v.get<double>());
  fail(path, "expected an expression string or a number");
}

std::vector<std::string> expressions(const json& v, const std::string& path) {
  std::vector<std::string> out;
  const auto& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(expression_text(arr[i], index(path, i)));
  return out;
}

TransferFunctionSpec::Root parse_root(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {as_number(v[0], index(path, 0)), as_number(v[1], index(path, 1))};
  fail(path, "expected a number or a [re, im] pair");
}

TransferFunctionSpec parse_tf(const json& v, const std::string& path) {
  TransferFunctionSpec tf;
  if (v.is_object() && v.contains("gain")) {
    check_keys(v, path, {"gain", "zeros", "poles"});
    tf.zero_pole_gain = true;
    tf.gain = as_number(v["gain"], join(path, "gain"));
    for (const char* key : {"zeros", "poles"}) {
      if (!v.contains(key)) continue;
      const auto p = join(path, key);
      const auto& arr = as_array(v[key], p);
      auto& roots = std::string_view(key) == "zeros" ? tf.zeros : tf.poles;
      for (std::size_t i = 0; i < arr.size(); ++i) roots.push_back(parse_root(arr[i], index(p, i)));
    }
  } else {
    check_keys(v, path, {"numerator", "denominator"});
    tf.numerator = numbers(require(v, path, "numerator"), join(path, "numerator"));
    tf.denominator = numbers(require(v, path, "denominator"), join(path, "denominator"));
  }
  try {
    (void)tf.build();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path, e.what()));
  }
  return tf;
}

json tf_to_json(const TransferFunctionSpec& tf) {
  if (!tf.zero_pole_gain) return {{"numerator", tf.numerator}, {"denominator", tf.denominator}};
  auto roots = [](const std::vector<TransferFunctionSpec::Root>& rs) {
    json arr = json::array();
    for (const auto& r : rs) arr.push_back(r.im == 0.0 ? json(r.re) : json::array({r.re, r.im}));
    return arr;
  };
  return {{"gain", tf.gain}, {"zeros", roots(tf.zeros)}, {"poles", roots(tf.poles)}};
}

GainAxis parse_axis(const json& v, const std::string& path) {
  check_keys(v, path, {"min", "max", "step"});
  return {as_number(require(v, path, "min"), join(path, "min")), as_number(require(v, path, "max"), join(path, "max")),
          as_number(require(v, path, "step"), join(path, "step"))};
}

json axis_to_json(const GainAxis& a) { return {{"min", a.min}, {"max", a.max}, {"step", a.step}}; }

Polynomial root_factor(const TransferFunctionSpec::Root& r) {
  if (r.im == 0.0) return {1.0, -r.re};
  return {1.0, -2.0 * r.re, r.re * r.re + r.im * r.im};
}

DesignConfig from_json(const json& root) {
  check_keys(root, "", {"plant", "frequencies", "tracking", "disturbance", "stability", "phase_grid_count", "bisection",
                        "design", "prefilter", "oracle"});
  DesignConfig cfg;

  const auto& plant = require(root, "", "plant");
  check_keys(plant, "plant", {"numerator", "denominator", "parameters", "nominal"});
  cfg.plant.numerator = expressions(require(plant, "plant", "numerator"), "plant.numerator");
  cfg.plant.denominator = expressions(require(plant, "plant", "denominator"), "plant.denominator");
  if (plant.contains("parameters")) {
    const auto& arr = as_array(plant["parameters"], "plant.parameters");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = index("plant.parameters", i);
      check_keys(arr[i], p, {"name", "min", "max", "grid_points"});
      const auto& name = require(arr[i], p, "name");
      if (!name.is_string()) fail(join(p, "name"), "expected a string");
      ParameterSpec spec;
      spec.name = name.get<std::string>();
      spec.min = as_number(require(arr[i], p, "min"), join(p, "min"));
      spec.max = as_number(require(arr[i], p, "max"), join(p, "max"));
      spec.grid_points = arr[i].contains("grid_points") ? as_int(arr[i]["grid_points"], join(p, "grid_points"))
                                                        : (spec.min == spec.max ? 1 : 10);
      cfg.plant.parameters.push_back(std::move(spec));
    }
  }
  if (plant.contains("nominal")) {
    const auto& nominal = plant["nominal"];
    if (!nominal.is_object()) fail("plant.nominal", "expected an object");
    for (const auto& [key, value] : nominal.items())
      cfg.plant.nominal[key] = as_number(value, join("plant.nominal", key));
  }

  cfg.frequencies = numbers(require(root, "", "frequencies"), "frequencies");

  const auto& tracking = require(root, "", "tracking");
  check_keys(tracking, "tracking", {"lower", "upper"});
  cfg.tracking_lower = parse_tf(require(tracking, "tracking", "lower"), "tracking.lower");
  cfg.tracking_upper = parse_tf(require(tracking, "tracking", "upper"), "tracking.upper");

  if (root.contains("disturbance")) {
    const auto& d = root["disturbance"];
    check_keys(d, "disturbance", {"caps"});
    const auto& arr = as_array(require(d, "disturbance", "caps"), "disturbance.caps");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = index("disturbance.caps", i);
      check_keys(arr[i], p, {"omega", "cap"});
      const double w = as_number(require(arr[i], p, "omega"), join(p, "omega"));
      if (cfg.disturbance_caps.count(w)) fail(join(p, "omega"), "duplicate frequency");
      cfg.disturbance_caps[w] = as_number(require(arr[i], p, "cap"), join(p, "cap"));
    }
  }

  if (root.contains("stability")) {
    const auto& s = root["stability"];
    check_keys(s, "stability", {"m", "delta_hf_db"});
    if (s.contains("m")) cfg.m_value = as_number(s["m"], "stability.m");
    if (s.contains("delta_hf_db")) cfg.delta_hf_db = as_number(s["delta_hf_db"], "stability.delta_hf_db");
  }

  if (root.contains("phase_grid_count")) cfg.phase_grid_count = as_int(root["phase_grid_count"], "phase_grid_count");

  if (root.contains("bisection")) {
    const auto& b = root["bisection"];
    check_keys(b, "bisection", {"tol_db", "scan_step_db", "floor_db", "ceiling_db"});
    if (b.contains("tol_db")) cfg.bisection.tol_db = as_number(b["tol_db"], "bisection.tol_db");
    if (b.contains("scan_step_db")) cfg.bisection.scan_step_db = as_number(b["scan_step_db"], "bisection.scan_step_db");
    if (b.contains("floor_db")) cfg.bisection.floor_db = as_number(b["floor_db"], "bisection.floor_db");
    if (b.contains("ceiling_db")) cfg.bisection.ceiling_db = as_number(b["ceiling_db"], "bisection.ceiling_db");
  }

  if (root.contains("design")) {
    const auto& d = root["design"];
    check_keys(d, "design",
               {"controller", "tau", "pair", "anchor", "use_hull", "exact_bound_recompute", "stability_sweep"});
    if (d.contains("controller")) {
      const auto& c = d["controller"];
      const std::string kind = c.is_string() ? c.get<std::string>() : "";
      if (kind == "pid") cfg.controller = ControllerKind::Pid;
      else if (kind == "pi") cfg.controller = ControllerKind::Pi;
      else if (kind == "pd") cfg.controller = ControllerKind::Pd;
      else fail("design.controller", "expected \"pid\", \"pi\" or \"pd\"");
    }
    if (d.contains("tau")) cfg.tau = as_number(d["tau"], "design.tau");
    if (d.contains("pair")) {
      const auto& p = d["pair"];
      if (!p.is_array() || p.size() != 2) fail("design.pair", "expected two frequency indices");
      cfg.pair = std::pair{as_int(p[0], "design.pair[0]"), as_int(p[1], "design.pair[1]")};
    }
    if (d.contains("anchor")) cfg.anchor = as_int(d["anchor"], "design.anchor");
    if (d.contains("use_hull")) cfg.use_hull = as_bool(d["use_hull"], "design.use_hull");
    if (d.contains("exact_bound_recompute"))
      cfg.exact_bound_recompute = as_bool(d["exact_bound_recompute"], "design.exact_bound_recompute");
    if (d.contains("stability_sweep")) cfg.stability_sweep = as_bool(d["stability_sweep"], "design.stability_sweep");
  }

  if (root.contains("prefilter")) cfg.prefilter = parse_tf(root["prefilter"], "prefilter");

  if (root.contains("oracle")) {
    const auto& o = root["oracle"];
    check_keys(o, "oracle", {"kp", "ki", "kd"});
    OracleBox box;
    if (o.contains("kp")) box.kp = parse_axis(o["kp"], "oracle.kp");
    if (o.contains("ki")) box.ki = parse_axis(o["ki"], "oracle.ki");
    if (o.contains("kd")) box.kd = parse_axis(o["kd"], "oracle.kd");
    cfg.oracle = box;
  }
  return cfg;
}

json to_json(const DesignConfig& cfg) {
  json plant;
  plant["numerator"] = cfg.plant.numerator;
  plant["denominator"] = cfg.plant.denominator;
  plant["parameters"] = json::array();
  for (const auto& p : cfg.plant.parameters)
    plant["parameters"].push_back({{"name", p.name}, {"min", p.min}, {"max", p.max}, {"grid_points", p.grid_points}});
  plant["nominal"] = json::object();
  for (const auto& [name, value] : cfg.plant.nominal) plant["nominal"][name] = value;

  json root;
  root["plant"] = plant;
  root["frequencies"] = cfg.frequencies;
  root["tracking"] = {{"lower", tf_to_json(cfg.tracking_lower)}, {"upper", tf_to_json(cfg.tracking_upper)}};
  if (!cfg.disturbance_caps.empty()) {
    json caps = json::array();
    for (const auto& [w, cap] : cfg.disturbance_caps) caps.push_back({{"omega", w}, {"cap", cap}});
    root["disturbance"] = {{"caps", caps}};
  }
  root["stability"] = {{"m", cfg.m_value}};
  if (cfg.delta_hf_db) root["stability"]["delta_hf_db"] = *cfg.delta_hf_db;
  root["phase_grid_count"] = cfg.phase_grid_count;
  root["bisection"] = {{"tol_db", cfg.bisection.tol_db},
                       {"scan_step_db", cfg.bisection.scan_step_db},
                       {"floor_db", cfg.bisection.floor_db},
                       {"ceiling_db", cfg.bisection.ceiling_db}};
  json design;
  design["controller"] = std::string(to_string(cfg.controller));
  if (cfg.tau) design["tau"] = *cfg.tau;
  if (cfg.pair) design["pair"] = {cfg.pair->first, cfg.pair->second};
  if (cfg.anchor) design["anchor"] = *cfg.anchor;
  design["use_hull"] = cfg.use_hull;
  design["exact_bound_recompute"] = cfg.exact_bound_recompute;
  design["stability_sweep"] = cfg.stability_sweep;
  root["design"] = design;
  if (cfg.prefilter) root["prefilter"] = tf_to_json(*cfg.prefilter);
  if (cfg.oracle)
    root["oracle"] = {{"kp", axis_to_json(cfg.oracle->kp)},
                      {"ki", axis_to_json(cfg.oracle->ki)},
                      {"kd", axis_to_json(cfg.oracle->kd)}};
  return root;
}

template <class Fn>
void with_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path, e.what()));
  }
}

} // namespace

RationalTransferFunction TransferFunctionSpec::build() const {
  if (!zero_pole_gain) return {numerator, denominator};
  Polynomial num{gain}, den{1.0};
  for (const auto& z : zeros) num = poly_multiply(num, root_factor(z));
  for (const auto& p : poles) den = poly_multiply(den, root_factor(p));
  return {std::move(num), std::move(den)};
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
  case ControllerKind::Pi: return "pi";
  case ControllerKind::Pd: return "pd";
  default: return "pid";
  }
}

void validate(const DesignConfig& cfg) {
  with_path("plant", [&] { (void)cfg.plant.build(); });
  const auto& f = cfg.frequencies;
  if (f.size() < 2) fail("frequencies", "at least two design frequencies are required");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0)) fail(index("frequencies", i), "frequencies must be positive");
    if (i > 0 && f[i] == f[i - 1]) fail(index("frequencies", i), "duplicate frequency");
    if (i > 0 && f[i] < f[i - 1]) fail(index("frequencies", i), "frequencies must be strictly increasing");
  }
  with_path("tracking", [&] { (void)TrackingSpec{cfg.tracking_lower.build(), cfg.tracking_upper.build()}; });
  for (const auto& [w, cap] : cfg.disturbance_caps) {
    if (std::find(f.begin(), f.end(), w) == f.end())
      fail("disturbance.caps", fmt::format("omega {} is not a design frequency", w));
    if (!(cap > 0.0)) fail("disturbance.caps", fmt::format("cap at omega {} must be positive", w));
  }
  if (!(cfg.m_value > 1.0)) throw Error(ErrorKind::InvalidM, fmt::format("stability.m: M must exceed 1, got {}", cfg.m_value));
  if (cfg.delta_hf_db && !(*cfg.delta_hf_db >= 0.0)) fail("stability.delta_hf_db", "must be non-negative");
  if (cfg.phase_grid_count < 10) fail("phase_grid_count", "must be at least 10");
  const auto& b = cfg.bisection;
  if (!(b.tol_db > 0.0)) fail("bisection.tol_db", "must be positive");
  if (!(b.scan_step_db > 0.0)) fail("bisection.scan_step_db", "must be positive");
  if (!(b.floor_db < b.ceiling_db)) fail("bisection", "floor_db must lie below ceiling_db");
  if (cfg.tau && !(*cfg.tau > 0.0)) fail("design.tau", "must be positive");
  const int n = static_cast<int>(f.size());
  if (cfg.pair) {
    const auto [k, l] = *cfg.pair;
    if (k < 1 || k > n || l < 1 || l > n) fail("design.pair", fmt::format("indices must lie in [1, {}]", n));
    if (k == l) fail("design.pair", "indices must be distinct");
  }
  if (cfg.anchor && (*cfg.anchor < 1 || *cfg.anchor > n))
    fail("design.anchor", fmt::format("index must lie in [1, {}]", n));
  if (cfg.prefilter) {
    const auto pf = cfg.prefilter->build();
    if (!is_hurwitz(pf.denominator())) throw Error(ErrorKind::UnstableModel, "prefilter: not stable");
  }
  if (cfg.oracle) {
    const std::pair<const char*, const GainAxis*> axes[] = {
        {"oracle.kp", &cfg.oracle->kp}, {"oracle.ki", &cfg.oracle->ki}, {"oracle.kd", &cfg.oracle->kd}};
    for (const auto& [path, axis] : axes)
      if (!(axis->step > 0.0) || !(axis->max >= axis->min) || axis->min < 0.0)
        fail(path, "needs 0 <= min <= max and step > 0");
  }
}

DesignConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, fmt::format("<root>: malformed JSON ({})", e.what()));
  }
  DesignConfig cfg = from_json(root);
  validate(cfg);
  return cfg;
}

DesignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json_text(const DesignConfig& config) { return to_json(config).dump(2) + "\n"; }

} // namespace qft
