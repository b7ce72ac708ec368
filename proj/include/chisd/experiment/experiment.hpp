#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "chisd/experiment/config.hpp"

/**
 * \file experiment.hpp
 *
 * @brief Batch driver: builds the problem pack named by a config, runs the requested search and writes artifacts.
 */

namespace chisd::experiment {

  enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitSolver = 3 };

  /// Command-line values that take precedence over the config file.
  struct Overrides {
    std::optional<std::filesystem::path> output;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> parallelism;
  };

  /// Problem, chart and the (possibly prepared) seed point of a run.
  struct Setup {
    std::unique_ptr<chisd::Problem> problem;
    std::unique_ptr<Manifold> chart;
    Vector seed;
  };

  /// Builds the problem pack; prepares the BEC ground state when asked. Throws on solver failure.
  Setup make_setup(const RunConfig& config);

  struct ExperimentOutput {
    SearchReport report;
    std::string problem_name;
    double wall_seconds = 0.0;
  };

  /// Runs the configured mode and writes every artifact below config.output_dir. Throws chisd::Error on failure.
  ExperimentOutput execute(const RunConfig& config, const std::string& config_source = "");

  /// Loads, overrides (environment, then command line), validates and executes. Reports errors on err.
  int run_experiment(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& err);

  /// Re-classifies a per-solution JSON written by execute and prints a JSON summary.
  int classify_solution(const std::filesystem::path& solution_file, std::ostream& out, std::ostream& err);

  /// Renders landscape.json as DOT to out_path, or to out when out_path is empty.
  int emit_graph(const std::filesystem::path& landscape_file, const std::optional<std::filesystem::path>& out_path, std::ostream& out,
                 std::ostream& err);

}  // namespace chisd::experiment
