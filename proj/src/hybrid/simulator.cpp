#include <cmath>
#include <limits>
#include <string>

#include "etes/error.hpp"
#include "etes/hybrid.hpp"

namespace etes {

void SimulationConfig::validate() const {
  if (!(flow_step > 0.0) || !std::isfinite(flow_step)) throw Error(ErrorKind::StepSizeInvalid, "flow_step must be > 0");
  if (!(event_tol > 0.0)) throw Error(ErrorKind::StepSizeInvalid, "event_tol must be > 0");
  if (!(max_t > 0.0) || !std::isfinite(max_t)) throw Error(ErrorKind::StepSizeInvalid, "max_t must be > 0");
  if (max_j < 1) throw Error(ErrorKind::StepSizeInvalid, "max_j must be >= 1");
  if (!(min_flow_after_jump >= 0.0)) throw Error(ErrorKind::StepSizeInvalid, "min_flow_after_jump must be >= 0");
  if (record_stride < 1) throw Error(ErrorKind::StepSizeInvalid, "record_stride must be >= 1");
}

Vector flow_step_rk4(const HybridSystem& system, const Vector& state, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::StepSizeInvalid, "rk4 step must be > 0");
  const auto n = state.size();
  Vector k1(n), k2(n), k3(n), k4(n);
  system.flow_map(state, k1);
  system.flow_map(state + 0.5 * h * k1, k2);
  system.flow_map(state + 0.5 * h * k2, k3);
  system.flow_map(state + h * k3, k4);
  Vector next = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw Error(ErrorKind::NonFiniteState, "rk4 produced a non-finite state");
  return next;
}

LocalizedEvent localize_event(const HybridSystem& system, const Vector& inside_state, const Vector& outside_state,
                              double h, double event_tol) {
  const auto& g = system.event_function;
  const double g_in = g(inside_state);
  const double g_out = g(outside_state);
  if (std::abs(g_in) <= event_tol) return {inside_state, 0.0};
  if (std::abs(g_out) <= event_tol) return {outside_state, h};
  if ((g_in > 0.0) == (g_out > 0.0)) {
    throw Error(ErrorKind::NoCrossingFound, "trigger residual has the same sign at both step ends");
  }
  // The crossing is searched in the step fraction; states are re-integrated
  // from inside_state so every candidate lies on the discrete flow.
  const bool rising = g_out > 0.0;
  double lo = 0.0;
  double hi = 1.0;
  Vector best = outside_state;
  double best_frac = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Vector x = flow_step_rk4(system, inside_state, mid * h);
    const double gm = g(x);
    if (std::abs(gm) <= event_tol) return {std::move(x), mid * h};
    if ((gm > 0.0) == rising) {
      hi = mid;
      best = std::move(x);
      best_frac = mid;
    } else {
      lo = mid;
    }
  }
  // Bracket collapsed to machine precision: the outside end is the closest D-side state.
  return {best, best_frac * h};
}

namespace {

bool near_or_past(double t, double target) {
  return t >= target - 1e-12 * std::max(1.0, std::abs(target));
}

}  // namespace

HybridArc simulate(const HybridSystem& system, const Vector& initial, const SimulationConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(initial.size()) != system.dimension) {
    throw Error(ErrorKind::DimensionMismatch, "initial state has dimension " + std::to_string(initial.size()) +
                                                  ", system expects " + std::to_string(system.dimension));
  }
  const bool in_c = system.flow_set(initial);
  const bool in_d = system.jump_set(initial);
  if (!in_c && !in_d) throw Error(ErrorKind::InitialOutsideDomain, "initial state is in neither C nor D");

  HybridArc arc(system.dimension, system.component_names);
  Vector x = initial;
  double t = 0.0;
  int j = 0;
  double interval_start = 0.0;
  long steps_in_interval = 0;
  double last_jump_t = -std::numeric_limits<double>::infinity();
  bool jump_pending = in_d;  // jump priority on C ∩ D
  bool last_recorded = true;
  arc.push_sample(t, x);

  auto record_pre_jump = [&] {
    if (!last_recorded) arc.push_sample(t, x);
    last_recorded = true;
  };

  while (true) {
    if (jump_pending) {
      record_pre_jump();
      if (std::isfinite(last_jump_t) && t - last_jump_t < config.min_flow_after_jump) {
        arc.termination = TerminationReason::ZenoSuspected;
        break;
      }
      x = system.jump_map(x);
      if (!x.allFinite()) throw Error(ErrorKind::NonFiniteState, "jump map produced a non-finite state");
      ++j;
      last_jump_t = t;
      arc.push_jump(t, x);
      last_recorded = true;
      interval_start = t;
      steps_in_interval = 0;
      if (j >= config.max_j) {
        arc.termination = TerminationReason::JumpBudgetExhausted;
        break;
      }
      const bool c = system.flow_set(x);
      jump_pending = system.jump_set(x);
      if (!c && !jump_pending) {
        arc.termination = TerminationReason::LeftDomain;
        break;
      }
      continue;
    }

    if (near_or_past(t, config.max_t)) {
      arc.termination = TerminationReason::HorizonReached;
      break;
    }
    if (!system.flow_set(x)) {
      arc.termination = TerminationReason::LeftDomain;
      break;
    }

    double t_next = interval_start + static_cast<double>(steps_in_interval + 1) * config.flow_step;
    if (t_next > config.max_t || near_or_past(t_next, config.max_t)) t_next = config.max_t;
    const double h = t_next - t;
    Vector next = flow_step_rk4(system, x, h);
    ++arc.flow_steps;
    ++steps_in_interval;

    const bool next_in_d = system.jump_set(next);
    const bool next_in_c = system.flow_set(next);
    if (next_in_d) {
      auto hit = localize_event(system, x, next, h, config.event_tol);
      const double t_hit = (hit.sub_step >= h) ? t_next : t + hit.sub_step;
      if (!(t_hit > t)) {
        // Already on the boundary at the start of the step.
        jump_pending = true;
        continue;
      }
      t = t_hit;
      x = std::move(hit.state);
      last_recorded = false;
      jump_pending = true;
      continue;
    }
    t = t_next;
    x = std::move(next);
    last_recorded = false;
    if (!next_in_c) {
      arc.push_sample(t, x);
      arc.termination = TerminationReason::LeftDomain;
      return arc;
    }
    if (steps_in_interval % config.record_stride == 0 || near_or_past(t, config.max_t)) {
      arc.push_sample(t, x);
      last_recorded = true;
    }
  }
  if (!last_recorded) arc.push_sample(t, x);
  return arc;
}

TerminationReason classify_termination(const HybridArc& arc, const SimulationConfig& config) {
  if (arc.termination == TerminationReason::ZenoSuspected || arc.termination == TerminationReason::LeftDomain) {
    return arc.termination;
  }
  if (arc.jump_count() >= config.max_j) return TerminationReason::JumpBudgetExhausted;
  if (near_or_past(arc.final_time().t, config.max_t)) return TerminationReason::HorizonReached;
  return arc.termination;
}

}  // namespace etes
