// Command-line driver: run a configured experiment, classify a saved solution, or redraw a landscape graph.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chisd/experiment/experiment.hpp"
#include "chisd/util.hpp"

int main(int argc, char** argv) {
  using namespace chisd::experiment;

  CLI::App app{"chisd: saddle search and solution landscapes"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config_file", config_path, "config file");
  run->add_option("--config", config_path, "config file (alternative to the positional form)");
  run->add_option("--output", output, "output directory, overrides output_dir");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--parallelism", parallelism, "worker threads");

  std::string solution;
  auto* cls = app.add_subcommand("classify", "report index and spectrum of a saved solution");
  cls->add_option("solution", solution, "solutions/<id>.json")->required();

  std::string landscape;
  std::optional<std::string> graph_out;
  auto* graph = app.add_subcommand("graph", "emit the DOT graph of a landscape.json");
  graph->add_option("landscape", landscape, "landscape.json")->required();
  graph->add_option("-o,--out", graph_out, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    chisd::set_log_level(chisd::parse_log_level(log_level));
  } catch (const std::exception& e) {
    std::cerr << "invalid --log-level: " << e.what() << "\n";
    return kExitValidation;
  }

  if (*run) {
    if (config_path.empty()) {
      std::cerr << "run: a config file is required\n";
      return kExitValidation;
    }
    Overrides ov;
    if (output) ov.output = *output;
    ov.seed = seed;
    ov.parallelism = parallelism;
    return run_experiment(config_path, ov, std::cerr);
  }
  if (*cls) return classify_solution(solution, std::cout, std::cerr);
  std::optional<std::filesystem::path> out_path;
  if (graph_out) out_path = *graph_out;
  return emit_graph(landscape, out_path, std::cout, std::cerr);
}
