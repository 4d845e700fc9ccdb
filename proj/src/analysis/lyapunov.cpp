#include <algorithm>
#include <cmath>
#include <random>

#include "etes/analysis.hpp"
#include "etes/error.hpp"

namespace etes {

namespace {

const Vector& require_minimizer(const CostFunction& cost, std::optional<Vector>& storage) {
  storage = cost.minimizer();
  if (!storage) throw Error(ErrorKind::MinimizerUnknown, "V requires a cost with known minimizer");
  return *storage;
}

}  // namespace

double lyapunov_V(const CostFunction& cost, double k, const Vector& u, const Vector& y) {
  std::optional<Vector> u_star;
  const Vector& us = require_minimizer(cost, u_star);
  const double gap = cost.value(u) - cost.value(us);
  return (1.0 - k) * gap + 0.5 * k * (y - cost.gradient(u)).squaredNorm();
}

Vector lyapunov_V_gradient(const CostFunction& cost, double k, const Vector& u, const Vector& y) {
  const auto n = u.size();
  const Vector g = cost.gradient(u);
  const Vector z = y - g;
  Vector out(2 * n);
  out.head(n) = (1.0 - k) * g - k * cost.hessian_times(u, z);
  out.tail(n) = k * z;
  return out;
}

double AttractorSpec::error_radius() const { return 2.0 * std::sqrt(beta1 * rho) / beta2; }

void AttractorSpec::validate() const {
  if (!cost) throw Error(ErrorKind::InvalidArgument, "attractor spec needs a cost");
  if (!(beta1 > 0.0) || !(beta2 > 0.0) || !(rho > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "beta1, beta2 and rho must be > 0");
  }
}

double default_beta2(const CostFunction& cost, double k) { return cost.lipschitz_gradient() + k; }

namespace {

double surrogate(const AttractorSpec& spec, const Vector& u, const Vector& y, double error_norm) {
  double dv = 0.0;
  const double excess = lyapunov_V(*spec.cost, spec.k, u, y) - spec.v_threshold();
  if (excess > 0.0) {
    const double slope = lyapunov_V_gradient(*spec.cost, spec.k, u, y).norm();
    // slope > 0 outside the sublevel set: V's only stationary point is its minimum.
    dv = slope > 0.0 ? excess / slope : excess;
  }
  const double de = std::max(0.0, error_norm - spec.error_radius());
  return std::hypot(dv, de);
}

}  // namespace

double distance_to_attractor(const AttractorSpec& spec, const Vector& state, const StateLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.n);
  return surrogate(spec, state.segment(layout.u(), n), state.segment(layout.y(), n),
                   state.segment(layout.e_u(), 2 * n).norm());
}

double distance_to_attractor(const AttractorSpec& spec, const ClosedLoopState& s) {
  return surrogate(spec, s.u, s.y, std::sqrt(s.e_u.squaredNorm() + s.e_y.squaredNorm()));
}

bool in_attractor(const AttractorSpec& spec, const Vector& state, const StateLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.n);
  const double v = lyapunov_V(*spec.cost, spec.k, state.segment(layout.u(), n), state.segment(layout.y(), n));
  const double e2 = state.segment(layout.e_u(), 2 * n).squaredNorm();
  return v <= spec.v_threshold() && spec.beta2 * spec.beta2 * e2 <= 4.0 * spec.beta1 * spec.rho;
}

VDecreaseReport check_v_decrease(const HybridArc& arc, const AttractorSpec& spec, const StateLayout& layout,
                                 double tolerance) {
  const auto n = static_cast<Eigen::Index>(layout.n);
  VDecreaseReport report;
  for (std::size_t i = 0; i < arc.intervals().size(); ++i) {
    double prev_v = 0.0;
    bool prev_outside = false;
    for (std::size_t k = 0; k < arc.samples_in(i); ++k) {
      const auto x = arc.state(i, k);
      const Vector state = x;
      const double v = lyapunov_V(*spec.cost, spec.k, state.segment(layout.u(), n), state.segment(layout.y(), n));
      const bool outside = !in_attractor(spec, state, layout);
      if (k > 0 && outside && prev_outside) {
        ++report.pairs_checked;
        const double increase = v - prev_v;
        report.max_increase = std::max(report.max_increase, increase);
        if (increase > tolerance) ++report.violations;
      }
      prev_v = v;
      prev_outside = outside;
    }
  }
  report.passed = report.violations == 0;
  return report;
}

std::vector<Vector> initial_conditions_at_distances(const AttractorSpec& spec, const StateLayout& layout,
                                                    const std::vector<double>& distances, std::uint64_t seed) {
  spec.validate();
  std::optional<Vector> u_star_storage;
  const Vector& u_star = require_minimizer(*spec.cost, u_star_storage);
  const auto n = static_cast<Eigen::Index>(layout.n);
  Vector x_star = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  x_star.segment(layout.u(), n) = u_star;
  x_star.segment(layout.y(), n) = spec.cost->gradient(u_star);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> out;
  for (double d : distances) {
    if (!(d >= 0.0)) throw Error(ErrorKind::InvalidArgument, "initial-condition distance must be >= 0");
    Vector dir = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
    for (Eigen::Index i = 0; i < 2 * n; ++i) dir[i] = normal(rng);
    dir /= dir.norm();
    auto dist_at = [&](double s) { return distance_to_attractor(spec, Vector(x_star + s * dir), layout); };
    double lo = 0.0;
    double hi = 1.0;
    while (dist_at(hi) < d) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw Error(ErrorKind::InvalidArgument, "cannot reach requested distance");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dist_at(mid) < d ? lo : hi) = mid;
    }
    out.push_back(x_star + hi * dir);
  }
  return out;
}

namespace {

bool shell_passes(const std::shared_ptr<const CostFunction>& cost, const TargetParams& params, double beta1,
                  double beta2, const CalibrationOptions& options) {
  AttractorSpec spec{beta1, beta2, params.rho, params.k, cost, true};
  const StateLayout layout{cost->dimension(), false};
  const auto system = build_target(cost, params);
  SimulationConfig sim;
  sim.max_t = options.horizon;
  sim.flow_step = options.flow_step;
  sim.max_j = 1000000;
  for (const auto& x0 : initial_conditions_at_distances(spec, layout, options.shell_distances, options.seed)) {
    const auto arc = simulate(system, x0, sim);
    if (!check_v_decrease(arc, spec, layout, options.tolerance).passed) return false;
  }
  return true;
}

}  // namespace

CalibrationReport calibrate_beta1(std::shared_ptr<const CostFunction> cost, const TargetParams& params,
                                  double beta2, const CalibrationOptions& options) {
  if (!cost) throw Error(ErrorKind::InvalidArgument, "calibration needs a cost");
  params.validate();
  CalibrationReport report;
  report.beta2 = beta2;
  // Coarse logarithmic scan from the top, then bisection against the next
  // failing candidate above the best pass.
  const double lo_log = std::log(options.beta1_min);
  const double hi_log = std::log(options.beta1_max);
  constexpr int kScan = 13;
  std::optional<double> best;
  double fail_above = options.beta1_max;
  for (int i = kScan - 1; i >= 0; --i) {
    const double b = std::exp(lo_log + (hi_log - lo_log) * i / (kScan - 1));
    ++report.candidates_tried;
    if (shell_passes(cost, params, b, beta2, options)) {
      best = b;
      break;
    }
    fail_above = b;
  }
  if (!best) {
    report.passed = false;
    report.beta1 = beta2 * beta2 / 4.0;
    return report;
  }
  double lo = *best;
  double hi = fail_above;
  if (hi > lo) {
    for (int it = 0; it < options.bisection_steps && hi / lo > 1.0 + 1e-3; ++it) {
      const double mid = std::sqrt(lo * hi);
      ++report.candidates_tried;
      (shell_passes(cost, params, mid, beta2, options) ? lo : hi) = mid;
    }
  }
  report.passed = true;
  report.beta1 = lo;
  return report;
}

}  // namespace etes
