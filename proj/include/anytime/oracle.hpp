#pragma once

#include "anytime/problem.hpp"

namespace anytime {

struct ReferenceSolution {
  Vector x;
  Vector lambda;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct ReferenceOptions {
  double tol = 1e-10;
  int max_iterations = 500000;
  // Attempt an active-set polish every this many dual iterations.
  int polish_every = 25;
};

// High-accuracy QP solve, independent of the barrier flow: accelerated projected gradient on the
// dual (projection onto λ ≥ 0), with an equality-constrained polish on the estimated active set.
// Multipliers are recovered by least squares on the stationarity condition Hx + q + Gᵀλ = 0.
// Returns once the KKT residual is below `tol`; throws ConvergenceError otherwise.
ReferenceSolution solve_reference(const QpData& qp, const ReferenceOptions& options = {});

// max(‖Hx + q + Gᵀλ‖∞, max(Gx − h)₊, max(−λ)₊, max|λ_i (Gx − h)_i|)
double kkt_residual(const QpData& qp, const Vector& x, const Vector& lambda);

// Saddle point of the modified barrier for a QP: the optimum of the QP with every constraint
// tightened to f_i(x) ≤ −1/β, with its multipliers divided by β. This is the equilibrium the
// primal-dual flow converges to.
ReferenceSolution flow_equilibrium(const QpData& qp, double beta,
                                   const ReferenceOptions& options = {});

}  // namespace anytime
