#pragma once

#include <functional>
#include <memory>

#include <Eigen/Dense>

namespace anytime {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Quadratic program  min ½xᵀHx + qᵀx  s.t.  Gx − h ≤ 0.
struct QpData {
  Matrix H;
  Vector q;
  Matrix G;  // m×p, may have zero rows
  Vector h;

  Eigen::Index dimension() const { return q.size(); }
  Eigen::Index num_constraints() const { return h.size(); }
};

// Evaluator bundle for  min f0(x)  s.t.  f_i(x) ≤ 0, i = 1..m.
//
// Constraints are evaluated in batch: `constraints` returns the m values f_i(x) and
// `constraint_jacobian` the m×p matrix whose rows are ∇f_iᵀ. The two Hessian callbacks are
// optional; when absent, consumers that need curvature fall back to finite differences.
struct ProblemEvaluators {
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> objective_gradient;
  std::function<Matrix(const Vector&)> objective_hessian;
  std::function<Vector(const Vector&)> constraints;
  std::function<Matrix(const Vector&)> constraint_jacobian;
  // Σ_i w_i ∇²f_i(x).
  std::function<Matrix(const Vector&, const Vector&)> weighted_constraint_hessian;
};

// Strongly convex inequality-constrained problem. Immutable once constructed.
class ProblemInstance {
 public:
  // `modulus` is the strong-convexity modulus of f0. It is trusted metadata for custom problems.
  ProblemInstance(Eigen::Index dimension, Eigen::Index num_constraints, double modulus,
                  ProblemEvaluators evaluators);

  Eigen::Index dimension() const { return dimension_; }
  Eigen::Index num_constraints() const { return num_constraints_; }
  double modulus() const { return modulus_; }

  double objective(const Vector& x) const;
  Vector objective_gradient(const Vector& x) const;
  Vector constraints(const Vector& x) const;
  Matrix constraint_jacobian(const Vector& x) const;

  bool has_objective_hessian() const { return static_cast<bool>(eval_.objective_hessian); }
  bool has_constraint_hessian() const {
    return static_cast<bool>(eval_.weighted_constraint_hessian);
  }
  Matrix objective_hessian(const Vector& x) const;
  Matrix weighted_constraint_hessian(const Vector& x, const Vector& weights) const;

  // Non-null only for problems built by make_qp.
  const QpData* qp() const { return qp_.get(); }

 private:
  friend ProblemInstance make_qp(Matrix H, Vector q, Matrix G, Vector h);

  void check_point(const Vector& x) const;

  Eigen::Index dimension_;
  Eigen::Index num_constraints_;
  double modulus_;
  ProblemEvaluators eval_;
  std::shared_ptr<const QpData> qp_;
};

// Builds the QP instance. Throws ConstructionError when H is not symmetric (abs. tol 1e-10),
// its smallest eigenvalue is ≤ 1e-12, shapes disagree, or a row of G is identically zero.
ProblemInstance make_qp(Matrix H, Vector q, Matrix G, Vector h);
ProblemInstance make_qp(const QpData& data);

// True iff f_i(x) < −margin for every constraint (vacuously true when m = 0).
bool is_strictly_feasible(const ProblemInstance& problem, const Vector& x, double margin = 0.0);

}  // namespace anytime
