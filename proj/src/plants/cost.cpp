#include <algorithm>
#include <cmath>
#include <random>

#include "etes/error.hpp"
#include "etes/plants.hpp"

namespace etes {

QuadraticCost::QuadraticCost(Eigen::MatrixXd q, Vector u_star) : q_(std::move(q)), u_star_(std::move(u_star)) {
  const auto n = u_star_.size();
  if (n == 0 || q_.rows() != n || q_.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "Q must be n x n with n = dim(u*) > 0");
  }
  if (!q_.isApprox(q_.transpose(), 1e-12)) throw Error(ErrorKind::InvalidArgument, "Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_);
  mu_ = eig.eigenvalues().minCoeff();
  lipschitz_ = eig.eigenvalues().maxCoeff();
  if (!(mu_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "Q must be positive definite");
}

QuadraticCost QuadraticCost::reference() {
  const double r2 = std::sqrt(2.0);
  Eigen::MatrixXd q(2, 2);
  q << r2, 1.0, 1.0, r2;
  q *= 0.5;
  Vector u_star(2);
  u_star << 5.0, -5.0;
  return QuadraticCost(std::move(q), std::move(u_star));
}

void QuadraticCost::check_dimension(const Vector& u) const {
  if (u.size() != u_star_.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cost expects dimension " + std::to_string(u_star_.size()) + ", got " + std::to_string(u.size()));
  }
}

double QuadraticCost::value(const Vector& u) const {
  check_dimension(u);
  const Vector d = u - u_star_;
  return 0.5 * d.dot(q_ * d);
}

Vector QuadraticCost::gradient(const Vector& u) const {
  check_dimension(u);
  return q_ * (u - u_star_);
}

Vector QuadraticCost::hessian_times(const Vector& u, const Vector& w) const {
  check_dimension(u);
  return q_ * w;
}

Vector CostFunction::hessian_times(const Vector& u, const Vector& w) const {
  const double wn = w.norm();
  if (wn == 0.0) return Vector::Zero(w.size());
  const double h = 1e-6 * std::max(1.0, u.norm()) / wn;
  return (gradient(u + h * w) - gradient(u - h * w)) / (2.0 * h);
}

double quadratic_value(const QuadraticCost& cost, const Vector& u) { return cost.value(u); }
Vector quadratic_gradient(const QuadraticCost& cost, const Vector& u) { return cost.gradient(u); }

GradientCheck check_gradient(const CostFunction& cost, std::size_t points, double box, double fd_step,
                             double tolerance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-box, box);
  const auto n = static_cast<Eigen::Index>(cost.dimension());
  GradientCheck report;
  report.points = points;
  for (std::size_t p = 0; p < points; ++p) {
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = dist(rng);
    const Vector analytic = cost.gradient(u);
    Vector numeric(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector up = u, dn = u;
      up[i] += fd_step;
      dn[i] -= fd_step;
      numeric[i] = (cost.value(up) - cost.value(dn)) / (2.0 * fd_step);
    }
    // Relative to the gradient scale, floored at 1 so near-stationary points
    // are judged absolutely.
    const double scale = std::max(1.0, analytic.norm());
    report.max_relative_error = std::max(report.max_relative_error, (analytic - numeric).norm() / scale);
  }
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

double sampled_gradient_lipschitz(const CostFunction& cost, std::size_t pairs, double box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-box, box);
  const auto n = static_cast<Eigen::Index>(cost.dimension());
  double worst = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    Vector a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
    }
    const double gap = (a - b).norm();
    if (gap == 0.0) continue;
    worst = std::max(worst, (cost.gradient(a) - cost.gradient(b)).norm() / gap);
  }
  return worst;
}

}  // namespace etes
