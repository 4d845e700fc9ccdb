#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "etes/controllers.hpp"
#include "etes/hybrid.hpp"
#include "etes/plants.hpp"

namespace etes {

/// V(x) = (1-k)(phi(u) - phi(u*)) + k/2 ||y - grad phi(u)||^2.
double lyapunov_V(const CostFunction& cost, double k, const Vector& u, const Vector& y);

/// Gradient of V with respect to x = (u, y).
Vector lyapunov_V_gradient(const CostFunction& cost, double k, const Vector& u, const Vector& y);

/// Parameters of the compact set
/// A(rho) = { V(x) <= 2 rho / beta1  and  beta2^2 ||e||^2 <= 4 beta1 rho }.
struct AttractorSpec {
  double beta1 = 1.0;
  double beta2 = 1.0;
  double rho = 1.0;
  double k = 0.75;
  std::shared_ptr<const CostFunction> cost;
  /// True when beta1/beta2 came from calibration rather than user input.
  bool calibrated = false;

  double v_threshold() const { return 2.0 * rho / beta1; }
  double error_radius() const;
  void validate() const;
};

/// beta2 default: L_phi + k.
double default_beta2(const CostFunction& cost, double k);

/// Surrogate distance to A(rho): zero exactly on the set, positive and continuous
/// outside. Combines the first-order distance to the V-sublevel set,
/// (V - c)_+ / ||grad V||, with the exact distance to the error ball.
double distance_to_attractor(const AttractorSpec& spec, const Vector& state, const StateLayout& layout);
double distance_to_attractor(const AttractorSpec& spec, const ClosedLoopState& state);
bool in_attractor(const AttractorSpec& spec, const Vector& state, const StateLayout& layout);

struct VDecreaseReport {
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  double max_increase = 0.0;
  bool passed = true;
};

/// Along each flow interval, V must not increase by more than `tolerance`
/// between consecutive samples lying outside A(rho).
VDecreaseReport check_v_decrease(const HybridArc& arc, const AttractorSpec& spec, const StateLayout& layout,
                                 double tolerance = 1e-6);

/// Deterministic initial conditions at prescribed surrogate distances from A(rho).
/// Each lies in the flow set with zero error, placed along a seeded random
/// direction in x = (u, y).
std::vector<Vector> initial_conditions_at_distances(const AttractorSpec& spec, const StateLayout& layout,
                                                    const std::vector<double>& distances, std::uint64_t seed);

struct CalibrationOptions {
  double beta1_min = 1e-3;
  double beta1_max = 1e3;
  int bisection_steps = 30;
  std::vector<double> shell_distances{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double horizon = 50.0;
  double flow_step = 1e-3;
  double tolerance = 1e-6;
  std::uint64_t seed = 7;
};

struct CalibrationReport {
  double beta1 = 0.0;
  double beta2 = 0.0;
  /// False when no beta1 in the search range passed; beta1 then holds the
  /// fallback beta2^2 / 4 (error ball covers the whole flow set).
  bool passed = false;
  std::size_t candidates_tried = 0;
};

/// Largest beta1 for which target-system runs started on a shell of initial
/// conditions pass the V-decrease check.
CalibrationReport calibrate_beta1(std::shared_ptr<const CostFunction> cost, const TargetParams& params,
                                  double beta2, const CalibrationOptions& options = {});

struct DwellReport {
  double delta = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  int jump_count = 0;
  double fitted_d = std::numeric_limits<double>::infinity();
  bool bound_satisfied = true;
  bool zeno_suspected = false;
};

inline constexpr double kZenoGapThreshold = 1e-9;

DwellReport dwell_time_check(const HybridArc& arc, double delta);

/// Checks j - i <= (t - s)/d + 1 for every pair (s, i) <= (t, j) of the domain.
bool dwell_bound_holds(const HybridArc& arc, double d);

struct ClosenessReport {
  double horizon = 0.0;
  double grid = 0.0;
  /// +infinity when some sample has no partner with the same jump index.
  double epsilon_achieved = 0.0;
};

/// Smallest eps (multiple of grid) for which the two arcs are (T, eps)-close.
ClosenessReport closeness(const HybridArc& arc_a, const HybridArc& arc_b, double horizon, double grid = 1e-3);

struct ArcEnvelope {
  double initial_distance = 0.0;
  double tail_max = 0.0;
  /// Hybrid time t + j after which the series stays within nu; empty if never.
  std::optional<double> entry_time;
  bool eventually_within_nu = false;
};

struct EnvelopeReport {
  double nu = 0.0;
  std::vector<ArcEnvelope> arcs;
  /// Antitonic least-squares fit of the cross-arc upper envelope, on the common grid.
  std::vector<double> grid_times;
  std::vector<double> fitted_envelope;
  double max_excess = 0.0;
  bool envelope_dominates = false;
  bool all_eventually_within_nu = false;
};

struct EnvelopeOptions {
  std::size_t grid_cells = 512;
  /// Fraction of the hybrid-time span used for tail statistics.
  double tail_fraction = 0.25;
};

EnvelopeReport practical_stability_envelope(const std::vector<HybridArc>& arcs, const AttractorSpec& spec,
                                            const StateLayout& layout, double nu, const EnvelopeOptions& options = {});

/// Distance-to-attractor series over hybrid time t + j.
struct DistanceSeries {
  std::vector<double> hybrid_time;
  std::vector<double> distance;
};

DistanceSeries distance_series(const HybridArc& arc, const AttractorSpec& spec, const StateLayout& layout);

/// Pool-adjacent-violators fit of a nonincreasing sequence (least squares).
std::vector<double> antitonic_regression(const std::vector<double>& values);

struct TriggerStats {
  int jump_count = 0;
  std::vector<double> jump_times;
  std::vector<double> inter_event_times;
  std::vector<double> histogram_edges;
  std::vector<std::size_t> histogram_counts;
  double t_span = 0.0;
  double jumps_per_unit_t = 0.0;
  std::size_t flow_steps = 0;
  double jumps_per_flow_step = 0.0;
};

TriggerStats trigger_stats(const HybridArc& arc, std::size_t bins = 10);

}  // namespace etes
