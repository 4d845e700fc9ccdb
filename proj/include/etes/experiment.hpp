#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "etes/analysis.hpp"
#include "etes/controllers.hpp"
#include "etes/plants.hpp"

namespace etes {

enum class ControllerKind { Target, LieES, ClassicalES, ClassicalAveraged };

const char* to_string(ControllerKind kind);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Target;
  double k = 0.75;
  double rho = 1.0;
  std::optional<double> epsilon;
  std::optional<double> a;
  std::optional<double> omega;

  bool operator==(const ControllerSpec&) const = default;
};

struct CostSpec {
  Eigen::MatrixXd q;
  Vector u_star;

  bool operator==(const CostSpec& o) const { return q == o.q && u_star == o.u_star; }
};

struct InitialSpec {
  Vector u;
  Vector y;
  Vector e_u;
  Vector e_y;
  double tau = 0.0;

  bool operator==(const InitialSpec& o) const {
    return u == o.u && y == o.y && e_u == o.e_u && e_y == o.e_y && tau == o.tau;
  }
};

struct SimulationSpec {
  double max_t = 50.0;
  int max_j = 10000;
  /// Empty means automatic: 40 samples per dither period for ES variants, 1e-3 otherwise.
  std::optional<double> flow_step;
  double event_tol = 1e-9;
  double min_flow_after_jump = 1e-9;
  int record_stride = 1;

  bool operator==(const SimulationSpec&) const = default;
};

struct AnalysisSpec {
  bool dwell = true;
  bool stats = true;
  bool gradient_check = true;
  bool closeness = false;
  double closeness_horizon = 20.0;
  double closeness_grid = 1e-3;
  bool envelope = false;
  double nu = 0.1;
  double delta = 10.0;
  /// Empty means calibrated / default.
  std::optional<double> beta1;
  std::optional<double> beta2;

  bool operator==(const AnalysisSpec&) const = default;
};

struct SweepSpec {
  std::vector<double> epsilon;
  std::vector<double> a;
  std::vector<double> omega;
  std::vector<double> rho;

  bool empty() const { return epsilon.empty() && a.empty() && omega.empty() && rho.empty(); }
  bool operator==(const SweepSpec&) const = default;
};

/// Optional pass/fail thresholds enforced under --assert.
struct AssertSpec {
  std::optional<double> final_u_error_max;
  std::optional<double> max_jumps_per_flow_step;
  std::optional<int> min_jumps;
  std::optional<double> closeness_max;
  std::optional<double> max_seconds;
  bool no_zeno = true;
  bool horizon_reached = true;

  bool operator==(const AssertSpec&) const = default;
};

struct ExperimentConfig {
  ControllerSpec controller;
  CostSpec cost;
  Dither dither = Dither::reference();
  InitialSpec initial;
  SimulationSpec simulation;
  AnalysisSpec analysis;
  SweepSpec sweep;
  AssertSpec assertions;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the YAML experiment file. Unknown keys and invalid values raise
/// ConfigInvalid naming the key path and source line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Rejects configurations that parse but cannot run (missing controller
/// parameters, dimension mismatches, invalid dither).
void validate_config(const ExperimentConfig& config);

std::shared_ptr<const QuadraticCost> make_cost(const ExperimentConfig& config);
HybridSystem make_system(const ExperimentConfig& config);
StateLayout make_layout(const ExperimentConfig& config);
Vector make_initial_state(const ExperimentConfig& config);
SimulationConfig make_simulation_config(const ExperimentConfig& config);

struct AssertionResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct RunResult {
  HybridArc arc;
  nlohmann::json analysis;
  std::vector<AssertionResult> assertions;
  std::filesystem::path output_dir;
  double seconds = 0.0;

  bool all_passed() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  bool write_files = true;
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct SweepResult {
  nlohmann::json summary;
  std::vector<AssertionResult> assertions;

  bool all_passed() const;
};

SweepResult run_sweep(const ExperimentConfig& config, const RunOptions& options = {}, int jobs = 1);

}  // namespace etes
