#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "etes/hybrid.hpp"
#include "etes/plants.hpp"

namespace etes {

/// Feedback gain k in (0, 1) and trigger threshold rho on ||e||^2.
struct TargetParams {
  double k = 0.75;
  double rho = 1.0;

  void validate() const;
};

struct LieESParams {
  TargetParams base;
  double epsilon = 0.04;
  Dither dither = Dither::reference();

  void validate() const;
};

struct ClassicalESParams {
  TargetParams base;
  double a = 0.1;
  double omega = 250.0;
  Dither dither = Dither::reference();

  void validate() const;
};

/// Offsets into the flat closed-loop state (u, y, e_u, e_y[, tau]).
struct StateLayout {
  std::size_t n = 0;
  bool has_phase = false;

  std::size_t dimension() const { return 4 * n + (has_phase ? 1 : 0); }
  Eigen::Index u() const { return 0; }
  Eigen::Index y() const { return static_cast<Eigen::Index>(n); }
  Eigen::Index e_u() const { return static_cast<Eigen::Index>(2 * n); }
  Eigen::Index e_y() const { return static_cast<Eigen::Index>(3 * n); }
  Eigen::Index tau() const { return static_cast<Eigen::Index>(4 * n); }
  std::vector<std::string> names() const;
  /// Indices of the xi = (u, y, e_u, e_y) block.
  std::vector<std::size_t> xi_components() const;
};

/// Closed-loop state with the held samples derivable as u - e_u and y - e_y.
struct ClosedLoopState {
  Vector u;
  Vector y;
  Vector e_u;
  Vector e_y;
  double tau = 0.0;

  Vector u_hat() const { return u - e_u; }
  Vector y_hat() const { return y - e_y; }

  Vector flatten(const StateLayout& layout) const;
  static ClosedLoopState unflatten(const Vector& x, const StateLayout& layout);
};

/// Squared-error trigger residual ||e||^2 - rho.
double trigger_residual(const Vector& x, const StateLayout& layout, double rho);

/// Target system H: flow (f, f), jump (x, 0), C = {||e||^2 <= rho}, D = {||e||^2 >= rho}.
HybridSystem build_target(std::shared_ptr<const CostFunction> cost, const TargetParams& p);

/// Dither-based gradient estimate (1/scale) phi(u_hat + scale v(tau)) v(tau).
Vector es_gradient_estimate(const CostFunction& cost, const Vector& u_hat, double tau, double scale,
                            const Dither& dither);

/// Lie-bracket ES system H_eps with state (xi, tau) and tau' = 1/eps^2.
HybridSystem build_lie_es(std::shared_ptr<const CostFunction> cost, const LieESParams& p);

/// Classical ES system H_{a,omega} with tau' = omega.
HybridSystem build_classical_es(std::shared_ptr<const CostFunction> cost, const ClassicalESParams& p);

/// Averaged classical scheme with the O(a) term dropped.
HybridSystem build_classical_averaged(std::shared_ptr<const CostFunction> cost, const TargetParams& p);

/// Integral remainder of the first-order expansion of the gradient estimate,
/// evaluated by composite Simpson quadrature in the interpolation parameter.
Vector hadamard_remainder(const CostFunction& cost, const Vector& u_hat, double tau, double epsilon,
                          const Dither& dither, int quad_points = 64);

}  // namespace etes
