#include <gtest/gtest.h>

#include "anytime/errors.hpp"
#include "anytime/problem.hpp"
#include "test_support.hpp"

using namespace anytime;
using testing_support::central_difference;
using testing_support::Rng;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST(MakeQp, IdentityWithoutConstraints) {
  const ProblemInstance p = make_qp(mat({{1}}), vec({0}), Matrix(0, 1), Vector(0));
  EXPECT_EQ(p.dimension(), 1);
  EXPECT_EQ(p.num_constraints(), 0);
  EXPECT_DOUBLE_EQ(p.objective(vec({0})), 0.0);
  EXPECT_DOUBLE_EQ(p.modulus(), 1.0);
}

TEST(MakeQp, EvaluatesObjectiveAndConstraint) {
  const ProblemInstance p = make_qp(mat({{2}}), vec({-2}), mat({{1}}), vec({1}));
  EXPECT_DOUBLE_EQ(p.objective(vec({1})), -1.0);
  EXPECT_DOUBLE_EQ(p.constraints(vec({1}))[0], 0.0);
  EXPECT_DOUBLE_EQ(p.objective_gradient(vec({1}))[0], 0.0);
}

TEST(MakeQp, RejectsIndefiniteHessian) {
  try {
    make_qp(mat({{1, 0.5}, {0.5, 0}}), vec({0, 0}), Matrix(0, 2), Vector(0));
    FAIL() << "expected ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("definite"), std::string::npos) << e.what();
  }
}

TEST(MakeQp, RejectsAsymmetricHessian) {
  try {
    make_qp(mat({{1, 0.5}, {0.4, 1}}), vec({0, 0}), Matrix(0, 2), Vector(0));
    FAIL() << "expected ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("symmetric"), std::string::npos) << e.what();
  }
}

TEST(MakeQp, AcceptsAsymmetryBelowTolerance) {
  EXPECT_NO_THROW(make_qp(mat({{1, 0.5}, {0.5 + 5e-11, 1}}), vec({0, 0}), Matrix(0, 2), Vector(0)));
}

TEST(MakeQp, RejectsSingularHessian) {
  EXPECT_THROW(make_qp(mat({{1, 0}, {0, 0}}), vec({0, 0}), Matrix(0, 2), Vector(0)),
               ConstructionError);
}

TEST(MakeQp, ZeroConstraintRowNamesItsIndex) {
  try {
    make_qp(mat({{1}}), vec({0}), mat({{1}, {0}, {2}}), vec({1, 1, 1}));
    FAIL() << "expected ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos) << e.what();
  }
}

TEST(MakeQp, RejectsShapeMismatch) {
  EXPECT_THROW(make_qp(mat({{1}}), vec({0, 0}), Matrix(0, 1), Vector(0)), ConstructionError);
  EXPECT_THROW(make_qp(mat({{1}}), vec({0}), mat({{1, 1}}), vec({1})), ConstructionError);
  EXPECT_THROW(make_qp(mat({{1}}), vec({0}), mat({{1}}), vec({1, 2})), ConstructionError);
}

TEST(MakeQp, RejectsNonFiniteData) {
  EXPECT_THROW(make_qp(mat({{1}}), vec({std::nan("")}), Matrix(0, 1), Vector(0)),
               ConstructionError);
}

TEST(ProblemInstance, EvaluatorDimensionMismatchThrows) {
  const ProblemInstance p = make_qp(mat({{1}}), vec({0}), mat({{1}}), vec({1}));
  EXPECT_THROW(p.objective(vec({0, 0})), DimensionError);
}

TEST(StrictFeasibility, VacuousWithoutConstraints) {
  const ProblemInstance p = make_qp(mat({{1}}), vec({0}), Matrix(0, 1), Vector(0));
  EXPECT_TRUE(is_strictly_feasible(p, vec({1e6})));
}

TEST(StrictFeasibility, InteriorBoundaryAndMargin) {
  // f1(x) = x − 1
  const ProblemInstance p = make_qp(mat({{1}}), vec({0}), mat({{1}}), vec({1}));
  EXPECT_TRUE(is_strictly_feasible(p, vec({0})));
  EXPECT_FALSE(is_strictly_feasible(p, vec({1})));
  EXPECT_FALSE(is_strictly_feasible(p, vec({2})));
  EXPECT_FALSE(is_strictly_feasible(p, vec({0.95}), 0.1));
  EXPECT_TRUE(is_strictly_feasible(p, vec({0.85}), 0.1));
}

TEST(ProblemInstance, CustomEvaluatorsWithFiniteDifferenceHessians) {
  // f0 = Σ exp(x_i) + ½‖x‖², f1 = ‖x‖² − 4
  ProblemEvaluators ev;
  ev.objective = [](const Vector& x) { return x.array().exp().sum() + 0.5 * x.squaredNorm(); };
  ev.objective_gradient = [](const Vector& x) { return Vector(x.array().exp().matrix() + x); };
  ev.constraints = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() - 4.0); };
  ev.constraint_jacobian = [](const Vector& x) { return Matrix(2.0 * x.transpose()); };
  const ProblemInstance p(2, 1, 1.0, ev);
  const Vector x = vec({0.3, -0.2});
  Matrix expected = Matrix::Identity(2, 2);
  expected.diagonal() += x.array().exp().matrix();
  EXPECT_LT((p.objective_hessian(x) - expected).norm(), 1e-5);
  const Matrix wh = p.weighted_constraint_hessian(x, vec({1.5}));
  EXPECT_LT((wh - 3.0 * Matrix::Identity(2, 2)).norm(), 1e-5);
}

// Property: analytic gradients of objective and constraints agree with central differences.
TEST(ProblemProperty, GradientsMatchFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = rng.integer(1, 6);
    const auto m = rng.integer(0, 8);
    const auto gen = testing_support::random_qp(rng, p, m);
    const ProblemInstance prob = make_qp(gen.data);
    const Vector x = rng.vector(p, -2.0, 2.0);
    const Vector fd = central_difference([&](const Vector& z) { return prob.objective(z); }, x, 1e-5);
    EXPECT_LT(testing_support::relative_error(prob.objective_gradient(x), fd), 1e-6);
    const Matrix J = prob.constraint_jacobian(x);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vector fdi =
          central_difference([&](const Vector& z) { return prob.constraints(z)[i]; }, x, 1e-5);
      EXPECT_LT(testing_support::relative_error(J.row(i).transpose(), fdi), 1e-6);
    }
  }
}

// Property: f0(y) ≥ f0(x) + ∇f0(x)ᵀ(y − x) + μ/2·‖y − x‖².
TEST(ProblemProperty, StrongConvexityInequality) {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = rng.integer(1, 6);
    const auto gen = testing_support::random_qp(rng, p, 0);
    const ProblemInstance prob = make_qp(gen.data);
    const Vector x = rng.vector(p, -5.0, 5.0);
    const Vector y = rng.vector(p, -5.0, 5.0);
    const double lower = prob.objective(x) + prob.objective_gradient(x).dot(y - x) +
                         0.5 * prob.modulus() * (y - x).squaredNorm();
    EXPECT_GE(prob.objective(y), lower - 1e-9 * (1.0 + std::abs(lower)));
  }
}
