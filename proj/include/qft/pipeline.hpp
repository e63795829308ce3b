#pragma once

// Stage orchestration: templates -> bounds -> design -> verify, and the files
// each stage writes.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qft/bounds.hpp"
#include "qft/config.hpp"
#include "qft/pid.hpp"
#include "qft/plant.hpp"
#include "qft/verify.hpp"

namespace qft {

struct BoundSet {
  std::vector<double> phase_grid;
  std::vector<double> deltas;
  std::vector<BoundCurve> tracking;
  std::vector<BoundCurve> performance;
  std::vector<BoundCurve> combined;
  double delta_hf_db = 0.0;
  UContour ucontour;
};

struct OracleOutcome {
  std::optional<OracleResult> result;
  std::string failure;
};

/// Lazily evaluated stages for one configuration. Every stage is a pure
/// function of the configuration and the thread count does not affect results.
class Pipeline {
public:
  explicit Pipeline(DesignConfig config, unsigned threads = 1);

  const DesignConfig& config() const noexcept { return config_; }
  /// The plant the optimizer sees: augmented with 1/(1 + tau s) when tau is set.
  const UncertainPlant& plant() const noexcept { return plant_; }
  const GainMap& gain_map() const noexcept { return gain_map_; }
  const TrackingSpec& tracking() const noexcept { return tracking_; }

  const std::vector<Template>& templates();
  const BoundSet& bounds();
  const DesignProblem& problem();
  const DesignResult& design();
  /// Physical controller gains (mapped back through the filter transform).
  std::optional<PidGains> physical_gains();
  const VerificationReport& verify();
  OracleOutcome run_oracle();

private:
  DesignConfig config_;
  unsigned threads_;
  UncertainPlant plant_;
  GainMap gain_map_;
  TrackingSpec tracking_;
  std::optional<std::vector<Template>> templates_;
  std::optional<BoundSet> bounds_;
  std::optional<DesignProblem> problem_;
  std::optional<DesignResult> design_;
  std::optional<VerificationReport> verify_;
};

enum class Command { Templates, Bounds, Design, Verify, All };

std::optional<Command> parse_command(std::string_view text);

struct RunOptions {
  Command command = Command::All;
  std::filesystem::path out_dir = "out";
  unsigned threads = 1;
  std::optional<int> phase_grid_count;
  /// 1-based pair override
  std::optional<std::pair<int, int>> pair;
  bool oracle = false;
};

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int usage = 1;
inline constexpr int infeasible = 2;
inline constexpr int verification_failed = 3;
} // namespace exit_code

/// Applies command-line overrides to a configuration and re-validates it.
DesignConfig apply_overrides(DesignConfig config, const RunOptions& options);

/// File name -> contents produced by a command.
using Artifacts = std::map<std::string, std::string>;

struct RunOutcome {
  Artifacts artifacts;
  int exit_code = exit_code::success;
};

RunOutcome run_pipeline(const DesignConfig& config, const RunOptions& options, std::ostream& log);

/// Runs the command and writes its artifacts under options.out_dir.
int run_command(const DesignConfig& config, const RunOptions& options, std::ostream& log);

std::string templates_csv(const UncertainPlant& plant, const std::vector<Template>& templates);
std::string bounds_csv(const std::vector<BoundCurve>& curves);
std::string envelope_csv(const std::vector<EnvelopeRow>& rows);

} // namespace qft
