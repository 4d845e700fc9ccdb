#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace etes {

using Vector = Eigen::VectorXd;

/// Flow map F: writes dx = F(x). `dx` arrives sized to the state dimension.
using FlowMap = std::function<void(const Vector& x, Vector& dx)>;
using JumpMap = std::function<Vector(const Vector& x)>;
using SetIndicator = std::function<bool(const Vector& x)>;
/// Scalar trigger residual: zero on the boundary of D, positive inside D.
using EventFunction = std::function<double(const Vector& x)>;

struct HybridTime {
  double t = 0.0;
  int j = 0;
};

struct DomainInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  int j = 0;
};

class HybridTimeDomain {
 public:
  HybridTimeDomain() = default;
  explicit HybridTimeDomain(std::vector<DomainInterval> intervals) : intervals_(std::move(intervals)) {}

  const std::vector<DomainInterval>& intervals() const { return intervals_; }
  int max_j() const { return intervals_.empty() ? -1 : intervals_.back().j; }
  double max_t() const { return intervals_.empty() ? 0.0 : intervals_.back().t_end; }

  /// Contiguity in t, consecutive j starting at zero, t_start <= t_end.
  bool well_formed() const;

 private:
  std::vector<DomainInterval> intervals_;
};

/// Data (C, F, D, G) of a hybrid system. Immutable once built; shareable across runs.
struct HybridSystem {
  std::size_t dimension = 0;
  FlowMap flow_map;
  JumpMap jump_map;
  SetIndicator flow_set;
  SetIndicator jump_set;
  EventFunction event_function;
  std::vector<std::string> component_names;
};

/// Builds a system whose flow and jump sets are the closed sublevel/superlevel
/// sets {event <= 0} and {event >= 0}.
HybridSystem make_guarded_system(std::size_t dimension, FlowMap flow, JumpMap jump, EventFunction event,
                                 std::vector<std::string> names = {});

enum class TerminationReason { HorizonReached, JumpBudgetExhausted, LeftDomain, ZenoSuspected };

const char* to_string(TerminationReason reason);

/// Samples of one flow interval. States are stored row-major in a flat buffer.
struct ArcInterval {
  int j = 0;
  std::vector<double> times;
  std::vector<double> states;
};

/// A trajectory on a hybrid time domain.
class HybridArc {
 public:
  HybridArc() = default;
  HybridArc(std::size_t dimension, std::vector<std::string> names);

  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& component_names() const { return names_; }
  const std::vector<ArcInterval>& intervals() const { return intervals_; }

  /// Appends a sample to the current interval; t must strictly increase.
  void push_sample(double t, const Vector& x);
  /// Opens interval j+1 at time t with post-jump state x.
  void push_jump(double t, const Vector& x);

  Eigen::Map<const Vector> state(std::size_t interval, std::size_t k) const;
  double time(std::size_t interval, std::size_t k) const { return intervals_[interval].times[k]; }
  std::size_t samples_in(std::size_t interval) const { return intervals_[interval].times.size(); }

  std::size_t sample_count() const;
  int jump_count() const { return intervals_.empty() ? 0 : static_cast<int>(intervals_.size()) - 1; }
  /// Continuous times at which jumps occurred, in order.
  std::vector<double> jump_times() const;
  HybridTimeDomain domain() const;
  /// Largest t + j over the arc's samples.
  double max_hybrid_time() const;
  Vector final_state() const;
  HybridTime final_time() const;

  TerminationReason termination = TerminationReason::HorizonReached;
  /// Number of RK4 steps taken (independent of recording stride).
  std::size_t flow_steps = 0;

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> names_;
  std::vector<ArcInterval> intervals_;
};

/// Keeps only the listed state components (e.g. dropping a dither phase).
HybridArc project(const HybridArc& arc, const std::vector<std::size_t>& components);

/// CSV with header `t,j,<names>`, 17 significant digits, jumps as two rows with equal t.
void write_csv(std::ostream& out, const HybridArc& arc);
HybridArc read_csv(std::istream& in);

struct SimulationConfig {
  double max_t = 50.0;
  int max_j = 10000;
  double flow_step = 1e-3;
  double event_tol = 1e-9;
  double min_flow_after_jump = 1e-9;
  /// Record every n-th flow step; interval endpoints are always recorded.
  int record_stride = 1;

  void validate() const;
};

Vector flow_step_rk4(const HybridSystem& system, const Vector& state, double h);

struct LocalizedEvent {
  Vector state;
  double sub_step = 0.0;
};

LocalizedEvent localize_event(const HybridSystem& system, const Vector& inside_state, const Vector& outside_state,
                              double h, double event_tol);

HybridArc simulate(const HybridSystem& system, const Vector& initial, const SimulationConfig& config);

TerminationReason classify_termination(const HybridArc& arc, const SimulationConfig& config);

}  // namespace etes
