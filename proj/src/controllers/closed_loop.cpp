#include <cmath>

#include "etes/controllers.hpp"
#include "etes/error.hpp"

namespace etes {

void TargetParams::validate() const {
  if (!(k > 0.0 && k < 1.0)) throw Error(ErrorKind::InvalidArgument, "k must lie in (0, 1)");
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidArgument, "rho must be > 0");
}

void LieESParams::validate() const {
  base.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
}

void ClassicalESParams::validate() const {
  base.validate();
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "a must be > 0");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw Error(ErrorKind::InvalidArgument, "omega must be > 0");
}

std::vector<std::string> StateLayout::names() const {
  std::vector<std::string> out;
  for (const char* block : {"u", "y", "e_u", "e_y"}) {
    for (std::size_t i = 1; i <= n; ++i) out.push_back(std::string(block) + std::to_string(i));
  }
  if (has_phase) out.emplace_back("tau");
  return out;
}

std::vector<std::size_t> StateLayout::xi_components() const {
  std::vector<std::size_t> out(4 * n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

Vector ClosedLoopState::flatten(const StateLayout& layout) const {
  const auto n = static_cast<Eigen::Index>(layout.n);
  if (u.size() != n || y.size() != n || e_u.size() != n || e_y.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "closed-loop state blocks must all have dimension n");
  }
  Vector x(static_cast<Eigen::Index>(layout.dimension()));
  x << u, y, e_u, e_y;
  if (layout.has_phase) x[layout.tau()] = tau;
  return x;
}

ClosedLoopState ClosedLoopState::unflatten(const Vector& x, const StateLayout& layout) {
  if (static_cast<std::size_t>(x.size()) != layout.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "state size does not match layout");
  }
  const auto n = static_cast<Eigen::Index>(layout.n);
  ClosedLoopState s;
  s.u = x.segment(layout.u(), n);
  s.y = x.segment(layout.y(), n);
  s.e_u = x.segment(layout.e_u(), n);
  s.e_y = x.segment(layout.e_y(), n);
  s.tau = layout.has_phase ? x[layout.tau()] : 0.0;
  return s;
}

double trigger_residual(const Vector& x, const StateLayout& layout, double rho) {
  return x.segment(layout.e_u(), static_cast<Eigen::Index>(2 * layout.n)).squaredNorm() - rho;
}

namespace {

HybridSystem assemble(StateLayout layout, double rho, FlowMap flow) {
  auto jump = [layout](const Vector& x) {
    Vector out = x;
    out.segment(layout.e_u(), static_cast<Eigen::Index>(2 * layout.n)).setZero();
    return out;
  };
  auto event = [layout, rho](const Vector& x) { return trigger_residual(x, layout, rho); };
  return make_guarded_system(layout.dimension(), std::move(flow), std::move(jump), std::move(event), layout.names());
}

void require_cost(const std::shared_ptr<const CostFunction>& cost) {
  if (!cost) throw Error(ErrorKind::InvalidArgument, "cost function is null");
}

void require_dither(const CostFunction& cost, const Dither& dither) {
  if (dither.dimension() != cost.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "dither has " + std::to_string(dither.dimension()) +
                                                  " channels, cost dimension is " + std::to_string(cost.dimension()));
  }
  const auto report = validate_dither(dither);
  if (!report.passed) {
    throw Error(ErrorKind::DitherInvalid, "moment residuals " + std::to_string(report.mean_residual) + ", " +
                                              std::to_string(report.second_moment_residual));
  }
}

/// Flow of the (u, y) block driven by a plant-output function g(u_hat, tau);
/// errors mirror (u, y) since the held samples are constant during flow.
template <class PlantOutput>
FlowMap zoh_flow(StateLayout layout, double k, double phase_rate, PlantOutput plant_output) {
  return [layout, k, phase_rate, plant_output](const Vector& x, Vector& dx) {
    const auto n = static_cast<Eigen::Index>(layout.n);
    const auto u = x.segment(layout.u(), n);
    const auto y = x.segment(layout.y(), n);
    const auto e_u = x.segment(layout.e_u(), n);
    const auto e_y = x.segment(layout.e_y(), n);
    const double tau = layout.has_phase ? x[layout.tau()] : 0.0;
    dx.segment(layout.u(), n) = -k * (y - e_y);
    dx.segment(layout.y(), n) = plant_output(Vector(u - e_u), tau) - y;
    dx.segment(layout.e_u(), n) = dx.segment(layout.u(), n);
    dx.segment(layout.e_y(), n) = dx.segment(layout.y(), n);
    if (layout.has_phase) dx[layout.tau()] = phase_rate;
  };
}

}  // namespace

HybridSystem build_target(std::shared_ptr<const CostFunction> cost, const TargetParams& p) {
  require_cost(cost);
  p.validate();
  const StateLayout layout{cost->dimension(), false};
  auto flow = zoh_flow(layout, p.k, 0.0, [cost](const Vector& u_hat, double) { return cost->gradient(u_hat); });
  return assemble(layout, p.rho, std::move(flow));
}

Vector es_gradient_estimate(const CostFunction& cost, const Vector& u_hat, double tau, double scale,
                            const Dither& dither) {
  const Vector v = dither.eval(tau);
  return (cost.value(u_hat + scale * v) / scale) * v;
}

HybridSystem build_lie_es(std::shared_ptr<const CostFunction> cost, const LieESParams& p) {
  require_cost(cost);
  p.validate();
  require_dither(*cost, p.dither);
  const StateLayout layout{cost->dimension(), true};
  const double eps = p.epsilon;
  auto flow = zoh_flow(layout, p.base.k, 1.0 / (eps * eps), [cost, eps, dither = p.dither](const Vector& u_hat, double tau) {
    return es_gradient_estimate(*cost, u_hat, tau, eps, dither);
  });
  return assemble(layout, p.base.rho, std::move(flow));
}

HybridSystem build_classical_es(std::shared_ptr<const CostFunction> cost, const ClassicalESParams& p) {
  require_cost(cost);
  p.validate();
  require_dither(*cost, p.dither);
  const StateLayout layout{cost->dimension(), true};
  const double a = p.a;
  auto flow = zoh_flow(layout, p.base.k, p.omega, [cost, a, dither = p.dither](const Vector& u_hat, double tau) {
    return es_gradient_estimate(*cost, u_hat, tau, a, dither);
  });
  return assemble(layout, p.base.rho, std::move(flow));
}

HybridSystem build_classical_averaged(std::shared_ptr<const CostFunction> cost, const TargetParams& p) {
  require_cost(cost);
  p.validate();
  const StateLayout layout{cost->dimension(), false};
  // Averaging the dither-driven term over one period leaves the gradient at the
  // held input; the held samples stay constant during flow, so e still mirrors x.
  auto flow = zoh_flow(layout, p.k, 0.0, [cost](const Vector& u_hat, double) { return cost->gradient(u_hat); });
  return assemble(layout, p.rho, std::move(flow));
}

Vector hadamard_remainder(const CostFunction& cost, const Vector& u_hat, double tau, double epsilon,
                          const Dither& dither, int quad_points) {
  if (quad_points < 16) throw Error(ErrorKind::InvalidArgument, "hadamard_remainder needs >= 16 quadrature points");
  const int intervals = quad_points % 2 == 0 ? quad_points : quad_points + 1;
  const Vector v = dither.eval(tau);
  const Vector g0 = cost.gradient(u_hat);
  const double h = 1.0 / intervals;
  double integral = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double lambda = i * h;
    integral += w * v.dot(cost.gradient(u_hat + epsilon * lambda * v) - g0);
  }
  integral *= h / 3.0;
  return integral * v;
}

}  // namespace etes
