#include <cmath>
#include <numbers>

#include <doctest.h>

#include "etes/error.hpp"
#include "etes/plants.hpp"

using namespace etes;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

constexpr double kSqrt2 = std::numbers::sqrt2;

}  // namespace

TEST_CASE("reference quadratic values") {
  const auto cost = QuadraticCost::reference();
  CHECK(quadratic_value(cost, v2(5, -5)) == 0.0);
  CHECK(quadratic_value(cost, v2(7, -5)) == doctest::Approx(kSqrt2).epsilon(1e-14));
  CHECK(quadratic_value(cost, v2(5, -3)) == doctest::Approx(kSqrt2).epsilon(1e-14));
}

TEST_CASE("reference quadratic gradient") {
  const auto cost = QuadraticCost::reference();
  CHECK(quadratic_gradient(cost, v2(5, -5)).norm() == 0.0);
  const Vector g = quadratic_gradient(cost, v2(7, -5));
  CHECK(g[0] == doctest::Approx(kSqrt2).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gradient agrees with central differences") {
  const auto cost = QuadraticCost::reference();
  const auto report = check_gradient(cost, 100, 10.0, 1e-5, 1e-8, 3);
  CHECK(report.points == 100);
  CHECK(report.passed);
  CHECK(report.max_relative_error <= 1e-8);
}

TEST_CASE("quadratic constants") {
  const auto cost = QuadraticCost::reference();
  CHECK(cost.lipschitz_gradient() == doctest::Approx((kSqrt2 + 1) / 2));
  CHECK(cost.strong_convexity() == doctest::Approx((kSqrt2 - 1) / 2));
  CHECK(sampled_gradient_lipschitz(cost, 200, 10.0, 1) <= cost.lipschitz_gradient() + 1e-12);
}

TEST_CASE("quadratic construction is checked") {
  Eigen::MatrixXd q(2, 2);
  q << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(QuadraticCost(q, v2(0, 0)), Error);
  q << 1, 2, 2, 1;  // indefinite
  CHECK_THROWS_AS(QuadraticCost(q, v2(0, 0)), Error);
  q << 1, 0, 0, 1;
  CHECK_THROWS_AS(QuadraticCost(q, Vector::Zero(3)), Error);
  const QuadraticCost ok(q, v2(0, 0));
  CHECK_THROWS_AS(ok.value(Vector::Zero(3)), Error);
}

TEST_CASE("reference dither values and periodicity") {
  const auto d = Dither::reference();
  CHECK(d.eval(0.0).norm() == 0.0);
  const Vector quarter = d.eval(0.25);
  CHECK(quarter[0] == doctest::Approx(kSqrt2).epsilon(1e-15));
  CHECK(std::abs(quarter[1]) < 1e-15);
  CHECK((d.eval(1.25) - quarter).norm() < 1e-14);
}

TEST_CASE("dither moment validation") {
  SUBCASE("reference dither") {
    const auto r = validate_dither(Dither::reference());
    CHECK(r.passed);
    CHECK(r.mean_residual <= kDitherMomentTolerance);
    CHECK(r.second_moment_residual <= kDitherMomentTolerance);
  }
  SUBCASE("scaled sine and cosine") {
    const Dither d(1.0, {{{kSqrt2, 1, 0.0}}, {{kSqrt2, 1, std::numbers::pi / 2}}});
    CHECK(validate_dither(d).passed);
  }
  SUBCASE("equal channels") {
    const Dither d(1.0, {{{1.0, 1, 0.0}}, {{1.0, 1, 0.0}}});
    const auto r = validate_dither(d);
    CHECK_FALSE(r.passed);
    // Off-diagonal second moment 1/2 and diagonal deficit 1/2.
    CHECK(r.second_moment_residual == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("equal channels with unit power") {
    const Dither d(1.0, {{{kSqrt2, 1, 0.0}}, {{kSqrt2, 1, 0.0}}});
    const auto r = validate_dither(d);
    CHECK_FALSE(r.passed);
    CHECK(r.second_moment_residual == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("too few quadrature points") { CHECK_THROWS_AS(validate_dither(Dither::reference(), 16), Error); }
}

TEST_CASE("dither construction is checked") {
  CHECK_THROWS_AS(Dither(0.0, {{{1.0, 1, 0.0}}}), Error);
  CHECK_THROWS_AS(Dither(1.0, {}), Error);
}
