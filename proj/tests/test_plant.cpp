#include <cmath>

#include <gtest/gtest.h>

#include "anytime/errors.hpp"
#include "anytime/plant.hpp"
#include "test_support.hpp"

using namespace anytime;
using testing_support::Rng;

namespace {

LinearPlant plant_of(Matrix A, Matrix B) {
  const Eigen::Index n = A.rows();
  return LinearPlant{std::move(A), std::move(B), Matrix::Identity(1, n)};
}

// Independent ZOH reference: truncated Taylor series of the augmented exponential with
// scaling and squaring.
std::pair<Matrix, Matrix> taylor_zoh(const Matrix& A, const Matrix& B, double dt) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Matrix M = Matrix::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A * dt;
  M.topRightCorner(n, m) = B * dt;
  int squarings = 0;
  while (M.lpNorm<Eigen::Infinity>() > 0.1) {
    M /= 2.0;
    ++squarings;
  }
  Matrix E = Matrix::Identity(n + m, n + m);
  Matrix term = Matrix::Identity(n + m, n + m);
  for (int k = 1; k <= 30; ++k) {
    term = term * M / static_cast<double>(k);
    E += term;
  }
  for (int s = 0; s < squarings; ++s) E = E * E;
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

}  // namespace

TEST(Plant, DcMotorStructure) {
  const DcMotorParams params;
  const LinearPlant motor = dc_motor(params);
  EXPECT_DOUBLE_EQ(motor.A(0, 0), -params.damping / params.inertia);
  EXPECT_DOUBLE_EQ(motor.A(0, 1), params.motor_constant / params.inertia);
  EXPECT_DOUBLE_EQ(motor.A(1, 0), -params.motor_constant / params.inductance);
  EXPECT_DOUBLE_EQ(motor.A(1, 1), -params.resistance / params.inductance);
  EXPECT_DOUBLE_EQ(motor.B(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(motor.B(1, 0), 1.0 / params.inductance);
  EXPECT_EQ(motor.C, (Matrix(1, 2) << 1.0, 0.0).finished());
}

TEST(Plant, DcMotorRejectsNonPositiveInertia) {
  DcMotorParams params;
  params.inertia = 0.0;
  EXPECT_THROW(dc_motor(params), ConstructionError);
}

TEST(Discretize, ZeroDynamicsIntegratesInput) {
  const Matrix B = (Matrix(2, 1) << 1.0, -2.0).finished();
  const DiscretePlant d = discretize(plant_of(Matrix::Zero(2, 2), B), 0.25);
  EXPECT_LT((d.A - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((d.B - 0.25 * B).norm(), 1e-14);
  EXPECT_EQ(d.period, 0.25);
}

TEST(Discretize, ScalarExponential) {
  const DiscretePlant d = discretize(plant_of(-Matrix::Ones(1, 1), Matrix::Ones(1, 1)), 1.0);
  EXPECT_NEAR(d.A(0, 0), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(d.B(0, 0), 1.0 - std::exp(-1.0), 1e-14);
}

TEST(Discretize, RejectsNonPositivePeriod) {
  const LinearPlant motor = dc_motor({});
  EXPECT_THROW(discretize(motor, 0.0), DomainError);
  EXPECT_THROW(discretize(motor, -0.1), DomainError);
}

TEST(Discretize, RejectsBadShapes) {
  EXPECT_THROW(discretize(plant_of(Matrix::Zero(2, 3), Matrix::Zero(2, 1)), 0.1),
               ConstructionError);
  EXPECT_THROW(discretize(plant_of(Matrix::Zero(2, 2), Matrix::Zero(3, 1)), 0.1),
               ConstructionError);
}

TEST(Discretize, MatchesSeriesReferenceOnMotor) {
  for (double dt : {1e-3, 0.02, 0.3}) {
    const LinearPlant motor = dc_motor({});
    const DiscretePlant d = discretize(motor, dt);
    const auto [Ad, Bd] = taylor_zoh(motor.A, motor.B, dt);
    EXPECT_LT((d.A - Ad).norm(), 1e-10);
    EXPECT_LT((d.B - Bd).norm(), 1e-10);
  }
}

TEST(SimulateStep, IdentityAndPureInput) {
  DiscretePlant d{Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Identity(2, 2), 1.0};
  const Vector x = (Vector(2) << 1.0, 2.0).finished();
  EXPECT_EQ(simulate_step(d, x, Vector::Constant(1, 5.0)), x);

  DiscretePlant e{Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1), 1.0};
  EXPECT_EQ(simulate_step(e, Vector::Constant(1, 7.0), Vector::Constant(1, 3.0))[0], 3.0);
}

TEST(SimulateStep, ShapeMismatchThrows) {
  const DiscretePlant d = discretize(dc_motor({}), 0.02);
  EXPECT_THROW(simulate_step(d, Vector::Zero(3), Vector::Zero(1)), DimensionError);
  EXPECT_THROW(simulate_step(d, Vector::Zero(2), Vector::Zero(2)), DimensionError);
}

TEST(SimulateStep, MatchesDirectArithmetic) {
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = rng.integer(1, 5);
    const auto m = rng.integer(1, 3);
    DiscretePlant d{rng.matrix(n, n, -1, 1), rng.matrix(n, m, -1, 1), Matrix::Identity(1, n), 0.1};
    const Vector x = rng.vector(n, -1, 1);
    const Vector u = rng.vector(m, -1, 1);
    Vector expected = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) expected[i] += d.A(i, j) * x[j];
      for (Eigen::Index j = 0; j < m; ++j) expected[i] += d.B(i, j) * u[j];
    }
    EXPECT_LT((simulate_step(d, x, u) - expected).norm(), 1e-14);
  }
}

// Property: two steps at Δt equal one step at 2Δt for the autonomous system.
TEST(PlantProperty, ZohSemigroup) {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = rng.integer(1, 4);
    const Matrix M = rng.matrix(n, n, -1, 1);
    // Shift the spectrum into the left half plane.
    const Matrix A = M - (M.norm() + 0.1) * Matrix::Identity(n, n);
    const LinearPlant plant = plant_of(A, rng.matrix(n, 1, -1, 1));
    const double dt = rng.uniform(0.01, 0.5);
    const DiscretePlant one = discretize(plant, dt);
    const DiscretePlant two = discretize(plant, 2 * dt);
    const Vector x = rng.vector(n, -1, 1);
    const Vector zero = Vector::Zero(1);
    const Vector via_two_steps = simulate_step(one, simulate_step(one, x, zero), zero);
    EXPECT_LT((via_two_steps - simulate_step(two, x, zero)).norm(), 1e-12);
    // Held input: B(2Δt) = (A(Δt) + I)·B(Δt).
    EXPECT_LT((two.B - (one.A + Matrix::Identity(n, n)) * one.B).norm(), 1e-12);
  }
}
