#include "anytime/problem.hpp"

#include <utility>

#include <fmt/format.h>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kDefinitenessTol = 1e-12;

}  // namespace

ProblemInstance::ProblemInstance(Eigen::Index dimension, Eigen::Index num_constraints,
                                 double modulus, ProblemEvaluators evaluators)
    : dimension_(dimension),
      num_constraints_(num_constraints),
      modulus_(modulus),
      eval_(std::move(evaluators)) {
  if (dimension_ < 1) {
    throw ConstructionError(fmt::format("dimension must be >= 1, got {}", dimension_));
  }
  if (num_constraints_ < 0) {
    throw ConstructionError("number of constraints must be >= 0");
  }
  if (!(modulus_ > 0.0)) {
    throw ConstructionError(fmt::format("strong-convexity modulus must be > 0, got {}", modulus_));
  }
  if (!eval_.objective || !eval_.objective_gradient) {
    throw ConstructionError("objective and objective gradient evaluators are required");
  }
  if (num_constraints_ > 0 && (!eval_.constraints || !eval_.constraint_jacobian)) {
    throw ConstructionError("constraint evaluators are required when m > 0");
  }
}

void ProblemInstance::check_point(const Vector& x) const {
  if (x.size() != dimension_) {
    throw DimensionError(
        fmt::format("point has dimension {}, problem has dimension {}", x.size(), dimension_));
  }
}

double ProblemInstance::objective(const Vector& x) const {
  check_point(x);
  return eval_.objective(x);
}

Vector ProblemInstance::objective_gradient(const Vector& x) const {
  check_point(x);
  return eval_.objective_gradient(x);
}

Vector ProblemInstance::constraints(const Vector& x) const {
  check_point(x);
  if (num_constraints_ == 0) return Vector(0);
  return eval_.constraints(x);
}

Matrix ProblemInstance::constraint_jacobian(const Vector& x) const {
  check_point(x);
  if (num_constraints_ == 0) return Matrix(0, dimension_);
  return eval_.constraint_jacobian(x);
}

Matrix ProblemInstance::objective_hessian(const Vector& x) const {
  check_point(x);
  if (eval_.objective_hessian) return eval_.objective_hessian(x);

  // Central differences of the gradient, symmetrized.
  const double step = 1e-6;
  Matrix hess(dimension_, dimension_);
  Vector probe = x;
  for (Eigen::Index j = 0; j < dimension_; ++j) {
    const double saved = probe[j];
    probe[j] = saved + step;
    const Vector plus = eval_.objective_gradient(probe);
    probe[j] = saved - step;
    const Vector minus = eval_.objective_gradient(probe);
    probe[j] = saved;
    hess.col(j) = (plus - minus) / (2.0 * step);
  }
  return 0.5 * (hess + hess.transpose());
}

Matrix ProblemInstance::weighted_constraint_hessian(const Vector& x, const Vector& weights) const {
  check_point(x);
  if (weights.size() != num_constraints_) {
    throw DimensionError("constraint weight vector has the wrong length");
  }
  if (num_constraints_ == 0) return Matrix::Zero(dimension_, dimension_);
  if (eval_.weighted_constraint_hessian) return eval_.weighted_constraint_hessian(x, weights);

  const double step = 1e-6;
  Matrix hess(dimension_, dimension_);
  Vector probe = x;
  for (Eigen::Index j = 0; j < dimension_; ++j) {
    const double saved = probe[j];
    probe[j] = saved + step;
    const Vector plus = eval_.constraint_jacobian(probe).transpose() * weights;
    probe[j] = saved - step;
    const Vector minus = eval_.constraint_jacobian(probe).transpose() * weights;
    probe[j] = saved;
    hess.col(j) = (plus - minus) / (2.0 * step);
  }
  return 0.5 * (hess + hess.transpose());
}

ProblemInstance make_qp(Matrix H, Vector q, Matrix G, Vector h) {
  const Eigen::Index p = q.size();
  if (p < 1) throw ConstructionError("QP dimension must be >= 1");
  if (H.rows() != p || H.cols() != p) {
    throw ConstructionError(fmt::format("H must be {}x{}, got {}x{}", p, p, H.rows(), H.cols()));
  }
  // An empty constraint block may arrive as a 0x0 matrix.
  if (G.size() == 0 && h.size() == 0) G.resize(0, p);
  if (G.cols() != p) {
    throw ConstructionError(fmt::format("G must have {} columns, got {}", p, G.cols()));
  }
  if (G.rows() != h.size()) {
    throw ConstructionError(
        fmt::format("G has {} rows but h has {} entries", G.rows(), h.size()));
  }
  if (!H.allFinite() || !q.allFinite() || !G.allFinite() || !h.allFinite()) {
    throw ConstructionError("QP data contains non-finite entries");
  }

  const double asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > kSymmetryTol) {
    throw ConstructionError(
        fmt::format("H is not symmetric: max |H - H^T| = {} exceeds {}", asymmetry, kSymmetryTol));
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw ConstructionError("H is not positive definite: eigenvalue computation failed");
  }
  const double smallest = eig.eigenvalues().minCoeff();
  if (smallest <= kDefinitenessTol) {
    throw ConstructionError(
        fmt::format("H is not positive definite: smallest eigenvalue {} <= {}", smallest,
                    kDefinitenessTol));
  }
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    if (G.row(i).cwiseAbs().maxCoeff() == 0.0) {
      throw ConstructionError(fmt::format("row {} of G is identically zero", i));
    }
  }

  auto data = std::make_shared<QpData>(QpData{std::move(H), std::move(q), std::move(G),
                                              std::move(h)});
  ProblemEvaluators eval;
  eval.objective = [data](const Vector& x) {
    return 0.5 * x.dot(data->H * x) + data->q.dot(x);
  };
  eval.objective_gradient = [data](const Vector& x) -> Vector { return data->H * x + data->q; };
  eval.objective_hessian = [data](const Vector&) -> Matrix { return data->H; };
  eval.constraints = [data](const Vector& x) -> Vector { return data->G * x - data->h; };
  eval.constraint_jacobian = [data](const Vector&) -> Matrix { return data->G; };
  eval.weighted_constraint_hessian = [p](const Vector&, const Vector&) -> Matrix {
    return Matrix::Zero(p, p);
  };

  ProblemInstance instance(p, data->G.rows(), smallest, std::move(eval));
  instance.qp_ = std::move(data);
  return instance;
}

ProblemInstance make_qp(const QpData& data) { return make_qp(data.H, data.q, data.G, data.h); }

bool is_strictly_feasible(const ProblemInstance& problem, const Vector& x, double margin) {
  if (problem.num_constraints() == 0) return true;
  const Vector values = problem.constraints(x);
  return (values.array() < -margin).all();
}

}  // namespace anytime
