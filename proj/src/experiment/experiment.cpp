#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

#include "etes/error.hpp"
#include "etes/experiment.hpp"
#include "etes/report_json.hpp"

namespace etes {

using nlohmann::json;

namespace {

bool has_phase(ControllerKind kind) { return kind == ControllerKind::LieES || kind == ControllerKind::ClassicalES; }

TargetParams target_params(const ExperimentConfig& c) { return TargetParams{c.controller.k, c.controller.rho}; }

}  // namespace

void validate_config(const ExperimentConfig& c) {
  const auto& ctl = c.controller;
  if (ctl.kind == ControllerKind::LieES && !ctl.epsilon) {
    throw Error(ErrorKind::ConfigInvalid, "controller.epsilon: required for controller lie_es");
  }
  if (ctl.kind == ControllerKind::ClassicalES && (!ctl.a || !ctl.omega)) {
    throw Error(ErrorKind::ConfigInvalid, "controller.a, controller.omega: required for controller classical_es");
  }
  if (!c.sweep.epsilon.empty() && ctl.kind != ControllerKind::LieES) {
    throw Error(ErrorKind::ConfigInvalid, "sweep.epsilon: only valid for controller lie_es");
  }
  if ((!c.sweep.a.empty() || !c.sweep.omega.empty()) && ctl.kind != ControllerKind::ClassicalES) {
    throw Error(ErrorKind::ConfigInvalid, "sweep.a / sweep.omega: only valid for controller classical_es");
  }
  try {
    (void)make_system(c);
    const auto sim = make_simulation_config(c);
    sim.validate();
    (void)make_initial_state(c);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
}

std::shared_ptr<const QuadraticCost> make_cost(const ExperimentConfig& c) {
  return std::make_shared<const QuadraticCost>(c.cost.q, c.cost.u_star);
}

StateLayout make_layout(const ExperimentConfig& c) {
  return StateLayout{static_cast<std::size_t>(c.cost.u_star.size()), has_phase(c.controller.kind)};
}

HybridSystem make_system(const ExperimentConfig& c) {
  const auto cost = make_cost(c);
  const auto base = target_params(c);
  switch (c.controller.kind) {
    case ControllerKind::Target: return build_target(cost, base);
    case ControllerKind::ClassicalAveraged: return build_classical_averaged(cost, base);
    case ControllerKind::LieES: {
      if (!c.controller.epsilon) throw Error(ErrorKind::ConfigInvalid, "controller.epsilon: required for lie_es");
      return build_lie_es(cost, LieESParams{base, *c.controller.epsilon, c.dither});
    }
    case ControllerKind::ClassicalES: {
      if (!c.controller.a || !c.controller.omega) {
        throw Error(ErrorKind::ConfigInvalid, "controller.a, controller.omega: required for classical_es");
      }
      return build_classical_es(cost, ClassicalESParams{base, *c.controller.a, *c.controller.omega, c.dither});
    }
  }
  throw Error(ErrorKind::ConfigInvalid, "controller.kind: unsupported");
}

Vector make_initial_state(const ExperimentConfig& c) {
  ClosedLoopState s{c.initial.u, c.initial.y, c.initial.e_u, c.initial.e_y, c.initial.tau};
  return s.flatten(make_layout(c));
}

SimulationConfig make_simulation_config(const ExperimentConfig& c) {
  SimulationConfig sim;
  sim.max_t = c.simulation.max_t;
  sim.max_j = c.simulation.max_j;
  sim.event_tol = c.simulation.event_tol;
  sim.min_flow_after_jump = c.simulation.min_flow_after_jump;
  sim.record_stride = c.simulation.record_stride;
  if (c.simulation.flow_step) {
    sim.flow_step = *c.simulation.flow_step;
  } else {
    // At least 40 samples per dither period in t.
    switch (c.controller.kind) {
      case ControllerKind::LieES: {
        const double eps = c.controller.epsilon.value_or(1.0);
        sim.flow_step = eps * eps * c.dither.period() / 40.0;
        break;
      }
      case ControllerKind::ClassicalES:
        sim.flow_step = c.dither.period() / (40.0 * c.controller.omega.value_or(1.0));
        break;
      default: sim.flow_step = 1e-3;
    }
  }
  return sim;
}

bool RunResult::all_passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

bool SweepResult::all_passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

namespace {

json assertion_json(const std::vector<AssertionResult>& results) {
  json out = json::array();
  for (const auto& a : results) {
    out.push_back({{"name", a.name},
                   {"value", finite_or_null(a.value)},
                   {"threshold", finite_or_null(a.threshold)},
                   {"passed", a.passed}});
  }
  return out;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

void write_plot_series(const std::filesystem::path& dir, const HybridArc& arc, const StateLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.n);
  std::ofstream u_out(dir / "u_series.csv", std::ios::binary);
  std::ofstream held_out(dir / "held_series.csv", std::ios::binary);
  u_out << "t,j";
  held_out << "t,j";
  for (Eigen::Index i = 1; i <= n; ++i) u_out << ",u" << i;
  for (Eigen::Index i = 1; i <= n; ++i) held_out << ",u_hat" << i;
  for (Eigen::Index i = 1; i <= n; ++i) held_out << ",y_hat" << i;
  u_out << '\n';
  held_out << '\n';
  u_out << std::setprecision(17);
  held_out << std::setprecision(17);
  for (std::size_t iv = 0; iv < arc.intervals().size(); ++iv) {
    const auto& interval = arc.intervals()[iv];
    for (std::size_t k = 0; k < interval.times.size(); ++k) {
      const auto x = arc.state(iv, k);
      u_out << interval.times[k] << ',' << interval.j;
      held_out << interval.times[k] << ',' << interval.j;
      for (Eigen::Index i = 0; i < n; ++i) u_out << ',' << x[layout.u() + i];
      for (Eigen::Index i = 0; i < n; ++i) held_out << ',' << x[layout.u() + i] - x[layout.e_u() + i];
      for (Eigen::Index i = 0; i < n; ++i) held_out << ',' << x[layout.y() + i] - x[layout.e_y() + i];
      u_out << '\n';
      held_out << '\n';
    }
  }
}

json parameter_block(const ExperimentConfig& c, const SimulationConfig& sim) {
  json p = {{"controller", to_string(c.controller.kind)}, {"k", c.controller.k}, {"rho", c.controller.rho}};
  if (c.controller.epsilon) p["epsilon"] = *c.controller.epsilon;
  if (c.controller.a) p["a"] = *c.controller.a;
  if (c.controller.omega) p["omega"] = *c.controller.omega;
  p["simulation"] = {{"max_t", sim.max_t},
                     {"max_j", sim.max_j},
                     {"flow_step", sim.flow_step},
                     {"event_tol", sim.event_tol},
                     {"min_flow_after_jump", sim.min_flow_after_jump},
                     {"record_stride", sim.record_stride}};
  return p;
}

/// Reference system for closeness: target H for lie_es, averaged system for classical_es.
std::optional<ControllerKind> closeness_reference(ControllerKind kind) {
  if (kind == ControllerKind::LieES) return ControllerKind::Target;
  if (kind == ControllerKind::ClassicalES) return ControllerKind::ClassicalAveraged;
  return std::nullopt;
}

AttractorSpec attractor_for(const ExperimentConfig& c, std::uint64_t seed) {
  const auto cost = make_cost(c);
  AttractorSpec spec;
  spec.cost = cost;
  spec.k = c.controller.k;
  spec.rho = c.controller.rho;
  spec.beta2 = c.analysis.beta2.value_or(default_beta2(*cost, c.controller.k));
  if (c.analysis.beta1) {
    spec.beta1 = *c.analysis.beta1;
  } else {
    CalibrationOptions options;
    options.seed = seed;
    spec.beta1 = calibrate_beta1(cost, target_params(c), spec.beta2, options).beta1;
    spec.calibrated = true;
  }
  return spec;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  const auto started = std::chrono::steady_clock::now();
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const auto cost = make_cost(config);
  const auto layout = make_layout(config);
  const auto system = make_system(config);
  const auto sim = make_simulation_config(config);
  const Vector x0 = make_initial_state(config);

  RunResult result;
  json analysis;
  analysis["parameters"] = parameter_block(config, sim);
  analysis["seed"] = seed;

  if (config.analysis.gradient_check) {
    analysis["gradient_check"] = to_json(check_gradient(*cost, 100, 10.0, 1e-5, 1e-6, seed));
  }
  if (has_phase(config.controller.kind)) analysis["dither_moments"] = to_json(validate_dither(config.dither));

  result.arc = simulate(system, x0, sim);
  const auto& arc = result.arc;
  const Vector xf = arc.final_state();
  const double final_u_error = (xf.segment(layout.u(), static_cast<Eigen::Index>(layout.n)) - cost->u_star()).norm();
  analysis["termination"] = to_string(arc.termination);
  analysis["final_time"] = {{"t", arc.final_time().t}, {"j", arc.final_time().j}};
  analysis["final_state"] = vector_json(xf);
  analysis["final_u_error"] = final_u_error;

  std::optional<DwellReport> dwell;
  if (config.analysis.dwell) {
    dwell = dwell_time_check(arc, config.analysis.delta);
    analysis["dwell"] = to_json(*dwell);
  }
  std::optional<TriggerStats> stats;
  if (config.analysis.stats || config.assertions.max_jumps_per_flow_step || config.assertions.min_jumps) {
    stats = trigger_stats(arc);
    analysis["trigger_stats"] = to_json(*stats);
  }

  std::optional<double> closeness_eps;
  if (config.analysis.closeness) {
    if (const auto ref_kind = closeness_reference(config.controller.kind)) {
      ExperimentConfig ref_cfg = config;
      ref_cfg.controller.kind = *ref_kind;
      ref_cfg.simulation.flow_step = std::min(1e-3, sim.flow_step);
      ref_cfg.simulation.record_stride = 1;
      const auto reference = simulate(make_system(ref_cfg), make_initial_state(ref_cfg), make_simulation_config(ref_cfg));
      const auto projected = project(arc, layout.xi_components());
      const auto report = closeness(projected, reference, config.analysis.closeness_horizon, config.analysis.closeness_grid);
      closeness_eps = report.epsilon_achieved;
      analysis["closeness"] = to_json(report);
      analysis["closeness"]["reference"] = to_string(*ref_kind);
    } else {
      analysis["closeness"] = {{"skipped", "no reference system for this controller"}};
    }
  }

  if (config.analysis.envelope) {
    const auto spec = attractor_for(config, seed);
    analysis["attractor"] = to_json(spec);
    analysis["envelope"] = to_json(practical_stability_envelope({arc}, spec, layout, config.analysis.nu));
  }

  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  analysis["seconds"] = result.seconds;

  const auto& as = config.assertions;
  auto add = [&](std::string name, double value, double threshold, bool passed) {
    result.assertions.push_back({std::move(name), value, threshold, passed});
  };
  if (as.no_zeno) {
    const bool zeno = arc.termination == TerminationReason::ZenoSuspected || (dwell && dwell->zeno_suspected);
    add("no_zeno", zeno ? 1.0 : 0.0, 0.0, !zeno);
  }
  if (as.horizon_reached) {
    const bool ok = classify_termination(arc, sim) == TerminationReason::HorizonReached;
    add("horizon_reached", arc.final_time().t, sim.max_t, ok);
  }
  if (as.final_u_error_max) add("final_u_error_max", final_u_error, *as.final_u_error_max, final_u_error <= *as.final_u_error_max);
  if (as.max_jumps_per_flow_step) {
    add("max_jumps_per_flow_step", stats->jumps_per_flow_step, *as.max_jumps_per_flow_step,
        stats->jumps_per_flow_step < *as.max_jumps_per_flow_step);
  }
  if (as.min_jumps) add("min_jumps", stats->jump_count, *as.min_jumps, stats->jump_count >= *as.min_jumps);
  if (as.closeness_max) {
    const double v = closeness_eps.value_or(std::numeric_limits<double>::infinity());
    add("closeness_max", v, *as.closeness_max, v <= *as.closeness_max);
  }
  if (as.max_seconds) add("max_seconds", result.seconds, *as.max_seconds, result.seconds < *as.max_seconds);
  analysis["assertions"] = assertion_json(result.assertions);
  analysis["config"] = serialize_config(config);
  result.analysis = std::move(analysis);

  result.output_dir = options.output_dir.value_or(std::filesystem::path(config.output_dir));
  if (options.write_files) {
    std::filesystem::create_directories(result.output_dir);
    {
      std::ofstream csv(result.output_dir / "trajectory.csv", std::ios::binary);
      write_csv(csv, arc);
    }
    write_plot_series(result.output_dir, arc, layout);
    write_text(result.output_dir / "config.resolved.yaml", serialize_config(config));
    write_text(result.output_dir / "analysis.json", result.analysis.dump(2) + "\n");
  }
  return result;
}

namespace {

struct SweepAxis {
  const char* name;
  const std::vector<double>* values;
  /// +1: the theory predicts improvement as the value increases; -1: as it decreases.
  int improving_direction;
};

std::string value_label(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void apply(ExperimentConfig& c, const std::string& axis, double v) {
  if (axis == "epsilon") c.controller.epsilon = v;
  if (axis == "a") c.controller.a = v;
  if (axis == "omega") c.controller.omega = v;
  if (axis == "rho") c.controller.rho = v;
}

bool nonincreasing(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] <= xs[i - 1])) return false;
  }
  return true;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const RunOptions& options, int jobs) {
  validate_config(config);
  if (config.sweep.empty()) throw Error(ErrorKind::ConfigInvalid, "sweep: at least one sweep list must be non-empty");
  const std::filesystem::path root = options.output_dir.value_or(std::filesystem::path(config.output_dir));
  jobs = std::max(1, jobs);

  const std::vector<SweepAxis> axes{{"epsilon", &config.sweep.epsilon, -1},
                                    {"a", &config.sweep.a, -1},
                                    {"omega", &config.sweep.omega, +1},
                                    {"rho", &config.sweep.rho, +1}};
  SweepResult out;
  json summary;
  summary["config"] = serialize_config(config);
  for (const auto& axis : axes) {
    if (axis.values->empty()) continue;
    std::vector<double> values = *axis.values;
    // Order along the direction in which the theory predicts closer tracking.
    std::sort(values.begin(), values.end(), [&](double l, double r) { return axis.improving_direction > 0 ? l < r : l > r; });

    std::vector<ExperimentConfig> configs;
    for (double v : values) {
      ExperimentConfig c = config;
      c.sweep = SweepSpec{};
      apply(c, axis.name, v);
      configs.push_back(std::move(c));
    }
    std::vector<json> rows(values.size());
    std::vector<std::vector<AssertionResult>> run_assertions(values.size());
    for (std::size_t start = 0; start < configs.size(); start += static_cast<std::size_t>(jobs)) {
      std::vector<std::future<void>> batch;
      const std::size_t stop = std::min(configs.size(), start + static_cast<std::size_t>(jobs));
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(std::async(std::launch::async, [&, i] {
          RunOptions ro = options;
          ro.output_dir = root / (std::string(axis.name) + "_" + value_label(values[i]));
          const auto run = run_experiment(configs[i], ro);
          const auto& a = run.analysis;
          json row = {{"value", values[i]},
                      {"output_dir", ro.output_dir->string()},
                      {"termination", a["termination"]},
                      {"final_u_error", a["final_u_error"]}};
          if (a.contains("trigger_stats")) row["jump_count"] = a["trigger_stats"]["jump_count"];
          if (a.contains("dwell")) row["min_gap"] = a["dwell"]["min_gap"];
          if (a.contains("closeness") && a["closeness"].contains("epsilon_achieved")) {
            row["closeness"] = a["closeness"]["epsilon_achieved"];
          }
          if (a.contains("envelope")) row["tail_max"] = a["envelope"]["arcs"][0]["tail_max"];
          rows[i] = std::move(row);
          run_assertions[i] = run.assertions;
        }));
      }
      for (auto& f : batch) f.get();
    }

    json axis_summary;
    axis_summary["order"] = axis.improving_direction > 0 ? "increasing" : "decreasing";
    axis_summary["runs"] = rows;
    auto collect = [&](const char* key) {
      std::vector<double> xs;
      for (const auto& r : rows) {
        if (!r.contains(key)) return std::optional<std::vector<double>>{};
        xs.push_back(r[key].is_null() ? std::numeric_limits<double>::infinity() : r[key].get<double>());
      }
      return std::optional<std::vector<double>>{xs};
    };
    json verdicts;
    if (auto xs = collect("closeness")) {
      const bool ok = nonincreasing(*xs);
      verdicts["closeness_nonincreasing"] = ok;
      verdicts["closeness_all_finite"] =
          std::all_of(xs->begin(), xs->end(), [](double x) { return std::isfinite(x); });
      out.assertions.push_back({std::string("sweep_") + axis.name + "_closeness_nonincreasing", 0.0, 0.0, ok});
    }
    if (auto xs = collect("tail_max")) verdicts["tail_max_nonincreasing"] = nonincreasing(*xs);
    if (std::string(axis.name) == "rho") {
      if (auto xs = collect("jump_count")) {
        bool strictly = true;
        for (std::size_t i = 1; i < xs->size(); ++i) strictly = strictly && (*xs)[i] < (*xs)[i - 1];
        verdicts["jump_count_strictly_decreasing"] = strictly;
        out.assertions.push_back({"sweep_rho_jump_count_strictly_decreasing", 0.0, 0.0, strictly});
      }
    }
    axis_summary["verdicts"] = verdicts;
    summary["axes"][axis.name] = axis_summary;
    for (std::size_t i = 0; i < values.size(); ++i) {
      for (auto a : run_assertions[i]) {
        a.name = std::string(axis.name) + "=" + value_label(values[i]) + ":" + a.name;
        out.assertions.push_back(std::move(a));
      }
    }
  }
  summary["assertions"] = assertion_json(out.assertions);
  out.summary = std::move(summary);
  if (options.write_files) {
    std::filesystem::create_directories(root);
    write_text(root / "sweep_summary.json", out.summary.dump(2) + "\n");
  }
  return out;
}

}  // namespace etes
