#pragma once

// JSON run configuration.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qft/bounds.hpp"
#include "qft/pid.hpp"
#include "qft/plant.hpp"
#include "qft/verify.hpp"

namespace qft {

/// A transfer function given either as descending-power coefficients or as
/// gain, zeros and poles. A root with a nonzero imaginary part stands for a
/// conjugate pair.
struct TransferFunctionSpec {
  struct Root {
    double re = 0.0;
    double im = 0.0;
    bool operator==(const Root&) const = default;
  };

  bool zero_pole_gain = false;
  Polynomial numerator;
  Polynomial denominator;
  double gain = 1.0;
  std::vector<Root> zeros;
  std::vector<Root> poles;

  RationalTransferFunction build() const;
  bool operator==(const TransferFunctionSpec&) const = default;
};

struct PlantConfig {
  std::vector<std::string> numerator;
  std::vector<std::string> denominator;
  std::vector<ParameterSpec> parameters;
  ParameterPoint nominal;

  UncertainPlant build() const { return {numerator, denominator, parameters, nominal}; }
  bool operator==(const PlantConfig&) const = default;
};

struct DesignConfig {
  PlantConfig plant;
  std::vector<double> frequencies;
  TransferFunctionSpec tracking_lower;
  TransferFunctionSpec tracking_upper;
  std::map<double, double> disturbance_caps;
  double m_value = 1.2;
  std::optional<double> delta_hf_db;
  int phase_grid_count = 100;
  BisectionOptions bisection;

  ControllerKind controller = ControllerKind::Pid;
  std::optional<double> tau;
  /// 1-based frequency indices
  std::optional<std::pair<int, int>> pair;
  /// 1-based anchor frequency for PI / PD
  std::optional<int> anchor;
  bool use_hull = true;
  bool exact_bound_recompute = false;
  bool stability_sweep = true;

  std::optional<TransferFunctionSpec> prefilter;
  std::optional<OracleBox> oracle;

  bool operator==(const DesignConfig&) const = default;
};

/// Throws ConfigError (or InvalidM) naming the offending field.
void validate(const DesignConfig& config);

DesignConfig parse_config(std::string_view json_text);
DesignConfig load_config(const std::filesystem::path& path);
std::string to_json_text(const DesignConfig& config);

std::string_view to_string(ControllerKind kind);

} // namespace qft
