#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "etes/hybrid.hpp"

namespace etes {

/// Static cost map phi with its gradient. Implementations are immutable.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const Vector& u) const = 0;
  virtual Vector gradient(const Vector& u) const = 0;
  /// Hessian-vector product; the default uses central differences of the gradient.
  virtual Vector hessian_times(const Vector& u, const Vector& w) const;
  /// Lipschitz constant of the gradient.
  virtual double lipschitz_gradient() const = 0;
  virtual std::optional<Vector> minimizer() const { return std::nullopt; }
};

/// phi(u) = 1/2 (u - u*)^T Q (u - u*) with Q symmetric positive definite.
class QuadraticCost final : public CostFunction {
 public:
  QuadraticCost(Eigen::MatrixXd q, Vector u_star);

  /// The two-dimensional cost of the reference experiment.
  static QuadraticCost reference();

  std::size_t dimension() const override { return static_cast<std::size_t>(u_star_.size()); }
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hessian_times(const Vector& u, const Vector& w) const override;
  double lipschitz_gradient() const override { return lipschitz_; }
  std::optional<Vector> minimizer() const override { return u_star_; }

  const Eigen::MatrixXd& q() const { return q_; }
  const Vector& u_star() const { return u_star_; }
  /// Smallest eigenvalue of Q (strong convexity modulus).
  double strong_convexity() const { return mu_; }

 private:
  void check_dimension(const Vector& u) const;

  Eigen::MatrixXd q_;
  Vector u_star_;
  double lipschitz_ = 0.0;
  double mu_ = 0.0;
};

double quadratic_value(const QuadraticCost& cost, const Vector& u);
Vector quadratic_gradient(const QuadraticCost& cost, const Vector& u);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t points = 0;
  bool passed = false;
};

/// Compares the analytic gradient with central differences at `points`
/// uniform samples in [-box, box]^n.
GradientCheck check_gradient(const CostFunction& cost, std::size_t points, double box, double fd_step,
                             double tolerance, std::uint64_t seed);

/// Largest observed ||grad(u) - grad(v)|| / ||u - v|| over sampled pairs.
double sampled_gradient_lipschitz(const CostFunction& cost, std::size_t pairs, double box, std::uint64_t seed);

/// One sinusoid a * sin(2 pi m tau / T + phase).
struct Harmonic {
  double amplitude = 0.0;
  int multiple = 1;
  double phase = 0.0;

  bool operator==(const Harmonic&) const = default;
};

/// T-periodic dither with each channel a finite sum of harmonics.
class Dither {
 public:
  Dither(double period, std::vector<std::vector<Harmonic>> channels);

  /// sqrt(2) (sin 2 pi tau, sin 4 pi tau), period 1.
  static Dither reference();

  double period() const { return period_; }
  std::size_t dimension() const { return channels_.size(); }
  const std::vector<std::vector<Harmonic>>& channels() const { return channels_; }

  Vector eval(double tau) const;
  void eval_into(double tau, Vector& out) const;

  bool operator==(const Dither&) const = default;

 private:
  double period_;
  std::vector<std::vector<Harmonic>> channels_;
};

inline Vector eval_dither(const Dither& d, double tau) { return d.eval(tau); }

struct MomentReport {
  double mean_residual = 0.0;
  double second_moment_residual = 0.0;
  int quadrature_points = 0;
  bool passed = false;
};

inline constexpr double kDitherMomentTolerance = 1e-6;

/// Composite Simpson check of zero mean and identity second moment over one period.
MomentReport validate_dither(const Dither& d, int quadrature_points = 256);

}  // namespace etes
