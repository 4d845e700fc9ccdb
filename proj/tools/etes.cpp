// etes: run, validate and sweep event-triggered ES experiments from a YAML file.
#include <iostream>

#include <CLI11.hpp>

#include "etes/error.hpp"
#include "etes/experiment.hpp"

namespace {

int report(const std::vector<etes::AssertionResult>& assertions, bool enforce) {
  bool ok = true;
  for (const auto& a : assertions) {
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << " value=" << a.value << " threshold=" << a.threshold
              << '\n';
    ok = ok && a.passed;
  }
  return enforce && !ok ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered extremum seeking experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool enforce = false;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Simulate one configuration and write its outputs");
  run->add_option("config", config_path, "Experiment YAML file")->required()->check(CLI::ExistingFile);
  run->add_flag("--assert", enforce, "Exit nonzero if any configured check fails");
  auto* run_out = run->add_option("--out", out_dir, "Output directory");
  auto* run_seed = run->add_option("--seed", seed, "Seed for sampled checks");

  auto* validate = app.add_subcommand("validate", "Parse and validate a configuration");
  validate->add_option("config", config_path, "Experiment YAML file")->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Run every value of the configured sweep lists");
  sweep->add_option("config", config_path, "Experiment YAML file")->required()->check(CLI::ExistingFile);
  sweep->add_flag("--assert", enforce, "Exit nonzero if any trend verdict or run check fails");
  auto* sweep_out = sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = etes::load_config(config_path);
    if (validate->parsed()) {
      etes::validate_config(config);
      std::cout << config_path << ": ok\n";
      return 0;
    }
    etes::RunOptions options;
    if (*run_out || *sweep_out) options.output_dir = out_dir;
    if (*run_seed) options.seed = seed;
    if (run->parsed()) {
      const auto result = etes::run_experiment(config, options);
      std::cout << "wrote " << result.output_dir.string() << " (" << result.arc.jump_count() << " jumps, "
                << result.seconds << " s)\n";
      return report(result.assertions, enforce);
    }
    const auto result = etes::run_sweep(config, options, jobs);
    return report(result.assertions, enforce);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
