#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jjosc/circuit.hpp"
#include "jjosc/feedback_linearization.hpp"
#include "jjosc/simulation.hpp"
#include "jjosc/trainer.hpp"

namespace jjosc {

enum class Mode { Simulate, TaylorCompare, Omega0Curve, ExactFl, TrainNn, TrainLinear, Replay };

std::string to_string(Mode mode);

/// Fully resolved scenario file. Only the members used by `mode` are
/// meaningful.
struct Scenario {
  Mode mode = Mode::Simulate;
  CircuitParams circuit = CircuitParams::reference();
  SimConfig sim;
  DriveSignal drive;
  ReferenceModel reference;
  std::vector<double> curve_grid;

  // replay
  ControllerFamily controller = ControllerFamily::neural(8);
  std::vector<double> controller_params;
  std::filesystem::path controller_file;
  double u_max = 0.19;

  // training
  TrainConfig train;
  std::vector<double> init;
  std::string init_source;

  std::filesystem::path output;
};

/// Parses the sectioned `key = value` format. Relative file references are
/// resolved against `base_dir`. Throws ConfigError with a one-line message on
/// unknown sections or keys, missing required keys, bad values, or values
/// outside the model's domain.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir,
                        const std::string& default_output);

Scenario load_scenario(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  /// Directory for relative output prefixes.
  std::optional<std::filesystem::path> output_dir;
};

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::vector<std::filesystem::path> files;
};

/// Exit codes: 0 on success, 1 on configuration errors (nothing written),
/// 2 on domain or singularity errors during the run (partial CSV written).
RunOutcome run_scenario(const std::filesystem::path& path, const RunOptions& options = {});
RunOutcome run_scenario(Scenario scenario, const RunOptions& options = {});

}  // namespace jjosc
