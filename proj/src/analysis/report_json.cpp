#include <cmath>

#include "etes/report_json.hpp"

namespace etes {

using nlohmann::json;

json finite_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

json to_json(const DwellReport& r) {
  return {{"delta", r.delta},
          {"min_gap", finite_or_null(r.min_gap)},
          {"jump_count", r.jump_count},
          {"fitted_d", finite_or_null(r.fitted_d)},
          {"bound_satisfied", r.bound_satisfied},
          {"zeno_suspected", r.zeno_suspected}};
}

json to_json(const ClosenessReport& r) {
  return {{"horizon", r.horizon}, {"grid", r.grid}, {"epsilon_achieved", finite_or_null(r.epsilon_achieved)}};
}

json to_json(const EnvelopeReport& r) {
  json arcs = json::array();
  for (const auto& a : r.arcs) {
    arcs.push_back({{"initial_distance", a.initial_distance},
                    {"tail_max", a.tail_max},
                    {"entry_time", a.entry_time ? json(*a.entry_time) : json(nullptr)},
                    {"eventually_within_nu", a.eventually_within_nu}});
  }
  return {{"nu", r.nu},
          {"arcs", arcs},
          {"grid_times", r.grid_times},
          {"fitted_envelope", r.fitted_envelope},
          {"max_excess", r.max_excess},
          {"envelope_dominates", r.envelope_dominates},
          {"all_eventually_within_nu", r.all_eventually_within_nu}};
}

json to_json(const TriggerStats& s) {
  return {{"jump_count", s.jump_count},
          {"jump_times", s.jump_times},
          {"inter_event_times", s.inter_event_times},
          {"histogram", {{"edges", s.histogram_edges}, {"counts", s.histogram_counts}}},
          {"t_span", s.t_span},
          {"jumps_per_unit_t", s.jumps_per_unit_t},
          {"flow_steps", s.flow_steps},
          {"jumps_per_flow_step", s.jumps_per_flow_step}};
}

json to_json(const VDecreaseReport& r) {
  return {{"pairs_checked", r.pairs_checked},
          {"violations", r.violations},
          {"max_increase", r.max_increase},
          {"passed", r.passed}};
}

json to_json(const MomentReport& r) {
  return {{"mean_residual", r.mean_residual},
          {"second_moment_residual", r.second_moment_residual},
          {"quadrature_points", r.quadrature_points},
          {"passed", r.passed}};
}

json to_json(const GradientCheck& r) {
  return {{"max_relative_error", r.max_relative_error}, {"points", r.points}, {"passed", r.passed}};
}

json to_json(const AttractorSpec& s) {
  return {{"beta1", s.beta1},
          {"beta2", s.beta2},
          {"rho", s.rho},
          {"k", s.k},
          {"v_threshold", s.v_threshold()},
          {"error_radius", s.error_radius()},
          {"calibrated", s.calibrated}};
}

}  // namespace etes
