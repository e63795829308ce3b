#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qft/config.hpp"
#include "qft/error.hpp"
#include "qft/pipeline.hpp"

namespace {

std::optional<std::pair<int, int>> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return std::nullopt;
  try {
    std::size_t used_k = 0, used_l = 0;
    const int k = std::stoi(text.substr(0, comma), &used_k);
    const int l = std::stoi(text.substr(comma + 1), &used_l);
    if (used_k != comma || used_l != text.size() - comma - 1) return std::nullopt;
    return std::pair{k, l};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop-shaping design of robust PID controllers on the Nichols chart"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  int phase_grid = 0;
  std::string pair;
  bool oracle = false;
  unsigned threads = 1;

  for (const char* name : {"templates", "bounds", "design", "verify", "all"}) {
    auto* sub = app.add_subcommand(name, std::string("run the pipeline up to the ") + name + " stage");
    sub->add_option("--config", config_path, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--phase-grid", phase_grid, "number of phase grid points on (-360, 0]");
    sub->add_option("--pair", pair, "1-based anchor frequency indices, e.g. 2,6");
    sub->add_flag("--oracle", oracle, "also run the exhaustive gain-grid search");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? qft::exit_code::success : qft::exit_code::usage;
  }

  qft::RunOptions options;
  options.command = *qft::parse_command(app.get_subcommands().front()->get_name());
  options.out_dir = out_dir;
  options.threads = threads;
  options.oracle = oracle;
  if (phase_grid != 0) options.phase_grid_count = phase_grid;
  if (!pair.empty()) {
    options.pair = parse_pair(pair);
    if (!options.pair) {
      std::cerr << "error: --pair expects two indices such as 2,6\n";
      return qft::exit_code::usage;
    }
  }

  qft::DesignConfig config;
  try {
    config = qft::apply_overrides(qft::load_config(config_path), options);
  } catch (const qft::Error& e) {
    std::cerr << "config error (" << qft::to_string(e.kind()) << "): " << e.what() << "\n";
    return qft::exit_code::usage;
  }

  try {
    return qft::run_command(config, options, std::cout);
  } catch (const qft::Error& e) {
    std::cerr << "error (" << qft::to_string(e.kind()) << "): " << e.what() << "\n";
    return qft::exit_code::usage;
  }
}
