// Scenario-driven front end: `jjosc run <file>` and `jjosc validate <file>`.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "jjosc/scenario.hpp"

namespace {

constexpr const char* kOutputDirEnv = "JJOSC_OUTPUT_DIR";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Josephson-junction LC oscillator: simulation, linearization and controller training"};
  app.require_subcommand(1);

  std::string run_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run a scenario file and write its outputs");
  run->add_option("scenario", run_file, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the training seed");
  run->add_option("--out", out, "Output prefix (overrides the scenario's 'output')");
  run->footer(std::string("Environment: ") + kOutputDirEnv + " sets the directory for relative prefixes.");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Parse and check a scenario file without running it");
  validate->add_option("scenario", validate_file, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (validate->parsed()) {
    try {
      const auto sc = jjosc::load_scenario(validate_file);
      std::cout << validate_file << ": ok (mode " << jjosc::to_string(sc.mode) << ")\n";
      return 0;
    } catch (const jjosc::ConfigError& e) {
      std::cerr << "jjosc: " << validate_file << ": " << e.what() << '\n';
      return 1;
    }
  }

  jjosc::RunOptions options;
  options.seed = seed;
  if (out) options.out = *out;
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) options.output_dir = dir;

  const auto outcome = jjosc::run_scenario(run_file, options);
  for (const auto& f : outcome.files) std::cout << f.string() << '\n';
  if (outcome.exit_code != 0) std::cerr << "jjosc: " << run_file << ": " << outcome.message << '\n';
  return outcome.exit_code;
}
