#include "anytime/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

// Dual of  min ½xᵀHx + qᵀx  s.t. Gx ≤ h:
//   x(λ) = −H⁻¹(q + Gᵀλ),   maximize d(λ) over λ ≥ 0, ∇d(λ) = Gx(λ) − h.
class DualProblem {
 public:
  explicit DualProblem(const QpData& qp) : qp_(qp), llt_(qp.H) {
    if (llt_.info() != Eigen::Success) {
      throw ConstructionError("reference solver requires a positive-definite H");
    }
    hinv_q_ = llt_.solve(qp.q);
    hinv_gt_ = llt_.solve(qp.G.transpose());
  }

  Vector primal(const Vector& lambda) const { return -(hinv_q_ + hinv_gt_ * lambda); }

  // d(λ) = −½(q + Gᵀλ)ᵀH⁻¹(q + Gᵀλ) − hᵀλ, written through x(λ).
  double value(const Vector& lambda, const Vector& x) const {
    const Vector w = qp_.q + qp_.G.transpose() * lambda;
    return 0.5 * w.dot(x) - qp_.h.dot(lambda);
  }

  double lipschitz() const {
    const Matrix dual_hessian = qp_.G * hinv_gt_;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (dual_hessian + dual_hessian.transpose()),
                                                    Eigen::EigenvaluesOnly);
    return std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  }

  // Equality-constrained solve on the index set, then multipliers by least squares on the
  // stationarity condition restricted to that set.
  ReferenceSolution polish(const std::vector<Eigen::Index>& active, double tol) const {
    const Eigen::Index m = qp_.num_constraints();
    const auto k = static_cast<Eigen::Index>(active.size());
    ReferenceSolution out;
    out.lambda = Vector::Zero(m);
    if (k == 0) {
      out.x = -hinv_q_;
    } else {
      Matrix g_active(k, qp_.dimension());
      Matrix hinv_gt_active(qp_.dimension(), k);
      Vector h_active(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index i = active[static_cast<std::size_t>(j)];
        g_active.row(j) = qp_.G.row(i);
        hinv_gt_active.col(j) = hinv_gt_.col(i);
        h_active[j] = qp_.h[i];
      }
      const Matrix schur = g_active * hinv_gt_active;
      const Vector nu = schur.completeOrthogonalDecomposition().solve(
          -(h_active + g_active * hinv_q_));
      out.x = -(hinv_q_ + hinv_gt_active * nu);

      const Vector residual = qp_.H * out.x + qp_.q;
      const Vector lambda_active =
          g_active.transpose().completeOrthogonalDecomposition().solve(-residual);
      for (Eigen::Index j = 0; j < k; ++j) {
        double value = lambda_active[j];
        if (value < 0.0 && value > -tol) value = 0.0;
        out.lambda[active[static_cast<std::size_t>(j)]] = value;
      }
    }
    out.kkt_residual = kkt_residual(qp_, out.x, out.lambda);
    return out;
  }

 private:
  const QpData& qp_;
  Eigen::LLT<Matrix> llt_;
  Vector hinv_q_;
  Matrix hinv_gt_;
};

}  // namespace

double kkt_residual(const QpData& qp, const Vector& x, const Vector& lambda) {
  const Vector stationarity = qp.H * x + qp.q + qp.G.transpose() * lambda;
  double residual = stationarity.size() > 0 ? stationarity.cwiseAbs().maxCoeff() : 0.0;
  const Vector f = qp.G * x - qp.h;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    residual = std::max(residual, f[i]);
    residual = std::max(residual, -lambda[i]);
    residual = std::max(residual, std::abs(lambda[i] * f[i]));
  }
  return residual;
}

ReferenceSolution solve_reference(const QpData& qp, const ReferenceOptions& options) {
  const Eigen::Index p = qp.dimension();
  const Eigen::Index m = qp.num_constraints();
  if (qp.H.rows() != p || qp.H.cols() != p || qp.G.rows() != m || (m > 0 && qp.G.cols() != p)) {
    throw DimensionError("inconsistent QP shapes");
  }
  const DualProblem dual(qp);

  if (m == 0) {
    ReferenceSolution out = dual.polish({}, options.tol);
    if (out.kkt_residual >= options.tol) {
      throw ConvergenceError(
          fmt::format("unconstrained solve left KKT residual {}", out.kkt_residual));
    }
    return out;
  }

  const double step = 1.0 / dual.lipschitz();
  Vector lambda = Vector::Zero(m);
  Vector y = lambda;
  Vector x = dual.primal(lambda);
  double value = dual.value(lambda, x);
  double momentum = 1.0;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector xy = dual.primal(y);
    const Vector next = (y + step * (qp.G * xy - qp.h)).cwiseMax(0.0);
    const Vector x_next = dual.primal(next);
    const double next_value = dual.value(next, x_next);

    if (next_value < value && momentum > 1.0) {
      // Adaptive restart: drop the momentum when the dual objective goes down.
      momentum = 1.0;
      y = lambda;
    } else {
      const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = next + ((momentum - 1.0) / momentum_next) * (next - lambda);
      momentum = momentum_next;
      lambda = next;
      x = x_next;
      value = next_value;
    }

    if (it % options.polish_every != 0) continue;

    ReferenceSolution plain{x, lambda, kkt_residual(qp, x, lambda), it};
    if (plain.kkt_residual < options.tol) return plain;
    best_residual = std::min(best_residual, plain.kkt_residual);

    std::vector<Eigen::Index> positive;
    std::vector<Eigen::Index> extended;
    const Vector f = qp.G * x - qp.h;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (lambda[i] > 0.0) positive.push_back(i);
      if (lambda[i] > 0.0 || f[i] > 0.0) extended.push_back(i);
    }
    for (const auto* candidate : {&positive, &extended}) {
      ReferenceSolution polished = dual.polish(*candidate, options.tol);
      polished.iterations = it;
      if (polished.kkt_residual < options.tol) return polished;
      best_residual = std::min(best_residual, polished.kkt_residual);
      if (positive.size() == extended.size()) break;
    }
  }
  throw ConvergenceError(fmt::format("reference QP solve did not reach KKT residual {} in {} "
                                     "iterations (best {})",
                                     options.tol, options.max_iterations, best_residual));
}

ReferenceSolution flow_equilibrium(const QpData& qp, double beta, const ReferenceOptions& options) {
  if (!(beta > 0.0)) throw DomainError("beta must be > 0");
  QpData tightened = qp;
  tightened.h = (qp.h.array() - 1.0 / beta).matrix();
  ReferenceSolution out = solve_reference(tightened, options);
  out.lambda /= beta;
  return out;
}

}  // namespace anytime
