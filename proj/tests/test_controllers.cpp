#include <cmath>
#include <random>

#include <doctest.h>

#include "etes/error.hpp"
#include "etes/controllers.hpp"

using namespace etes;

namespace {

auto reference_cost() { return std::make_shared<const QuadraticCost>(QuadraticCost::reference()); }

Vector eval_flow(const HybridSystem& sys, const Vector& x) {
  Vector dx(x.size());
  sys.flow_map(x, dx);
  return dx;
}

}  // namespace

TEST_CASE("target flow vanishes at the equilibrium") {
  const auto cost = reference_cost();
  const auto sys = build_target(cost, {0.75, 1.0});
  Vector x = Vector::Zero(8);
  x.head(2) = cost->u_star();
  CHECK(eval_flow(sys, x).norm() == 0.0);
}

TEST_CASE("jump map zeroes the sampling error") {
  const auto sys = build_target(reference_cost(), {0.75, 1.0});
  Vector x(8);
  x << 1, 2, 3, 4, 0.5, -0.5, 0.1, 0;
  Vector expected(8);
  expected << 1, 2, 3, 4, 0, 0, 0, 0;
  CHECK((sys.jump_map(x) - expected).norm() == 0.0);
}

TEST_CASE("target flow at the origin") {
  const auto cost = reference_cost();
  const auto sys = build_target(cost, {0.75, 1.0});
  const Vector dx = eval_flow(sys, Vector::Zero(8));
  const Vector g = quadratic_gradient(*cost, Vector::Zero(2));
  CHECK(dx.head(2).norm() == 0.0);
  CHECK((dx.segment(2, 2) - g).norm() < 1e-15);
  // Hand value: Q (-5, 5) = ((5 - 5 sqrt2)/2, (5 sqrt2 - 5)/2).
  CHECK(g[0] == doctest::Approx((5 - 5 * std::sqrt(2.0)) / 2));
  CHECK(g[1] == doctest::Approx((5 * std::sqrt(2.0) - 5) / 2));
  // The error block mirrors the plant block while the held values are frozen.
  CHECK((dx.tail(4) - dx.head(4)).norm() == 0.0);
}

TEST_CASE("phase rates") {
  const auto cost = reference_cost();
  const auto lie = build_lie_es(cost, LieESParams{{0.75, 1.0}, 0.04, Dither::reference()});
  CHECK(eval_flow(lie, Vector::Zero(9))[8] == doctest::Approx(625.0).epsilon(1e-14));
  const auto cl = build_classical_es(cost, ClassicalESParams{{0.75, 1.0}, 0.1, 250.0, Dither::reference()});
  CHECK(eval_flow(cl, Vector::Zero(9))[8] == 250.0);
}

TEST_CASE("gradient estimate vanishes where the dither does") {
  const auto cost = reference_cost();
  Vector u(2);
  u << 1.0, -2.0;
  CHECK(es_gradient_estimate(*cost, u, 0.0, 0.1, Dither::reference()).norm() == 0.0);
}

TEST_CASE("hadamard decomposition of the gradient estimate") {
  const auto cost = reference_cost();
  const auto d = Dither::reference();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> phase(0.0, 1.0);
  for (double eps : {0.01, 0.04, 0.1}) {
    double worst_identity = 0.0;
    double worst_closed_form = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vector u(2);
      u << box(rng), box(rng);
      const double tau = phase(rng);
      const Vector v = d.eval(tau);
      const Vector g = es_gradient_estimate(*cost, u, tau, eps, d);
      const Vector r = hadamard_remainder(*cost, u, tau, eps, d);
      const Vector rhs = cost->value(u) / eps * v + v * v.dot(cost->gradient(u)) + r;
      worst_identity = std::max(worst_identity, (g - rhs).norm());
      // For a quadratic the remainder is (eps/2) v v^T Q v.
      const Vector exact = 0.5 * eps * v * v.dot(cost->q() * v);
      worst_closed_form = std::max(worst_closed_form, (r - exact).norm());
    }
    CHECK(worst_identity <= 1e-9);
    CHECK(worst_closed_form <= 1e-12);
  }
  Vector u(2);
  u << 1.0, 1.0;
  CHECK(hadamard_remainder(*cost, u, 0.3, 0.0, d).norm() == 0.0);
}

TEST_CASE("classical and lie-bracket flows coincide on the parameter diagonal") {
  const auto cost = reference_cost();
  const double eps = 0.04;
  const auto lie = build_lie_es(cost, LieESParams{{0.75, 1.0}, eps, Dither::reference()});
  const auto cl = build_classical_es(cost, ClassicalESParams{{0.75, 1.0}, eps, 1.0 / (eps * eps), Dither::reference()});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vector x(9);
    for (auto& c : x) c = box(rng);
    x[8] = std::abs(x[8]) / 10.0;
    worst = std::max(worst, (eval_flow(lie, x) - eval_flow(cl, x)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("controller parameters are validated") {
  const auto cost = reference_cost();
  CHECK_THROWS_AS(build_target(cost, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(build_target(cost, {0.5, 0.0}), Error);
  CHECK_THROWS_AS(build_lie_es(cost, LieESParams{{0.75, 1.0}, 0.0, Dither::reference()}), Error);
  const Dither bad(1.0, {{{1.0, 1, 0.0}}, {{1.0, 1, 0.0}}});
  CHECK_THROWS_AS(build_lie_es(cost, LieESParams{{0.75, 1.0}, 0.04, bad}), Error);
  const Dither one(1.0, {{{std::sqrt(2.0), 1, 0.0}}});
  CHECK_THROWS_AS(build_classical_es(cost, ClassicalESParams{{0.75, 1.0}, 0.1, 10.0, one}), Error);
}

TEST_CASE("state layout") {
  const StateLayout layout{2, true};
  CHECK(layout.dimension() == 9);
  CHECK(layout.names().back() == "tau");
  CHECK(layout.xi_components().size() == 8);
  ClosedLoopState s{Vector::Ones(2), 2 * Vector::Ones(2), 0.5 * Vector::Ones(2), Vector::Zero(2), 0.3};
  const auto back = ClosedLoopState::unflatten(s.flatten(layout), layout);
  CHECK(back.tau == 0.3);
  CHECK((back.u_hat() - 0.5 * Vector::Ones(2)).norm() == 0.0);
  CHECK(trigger_residual(s.flatten(layout), layout, 1.0) == doctest::Approx(-0.5));
}
