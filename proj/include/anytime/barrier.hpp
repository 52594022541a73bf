#pragma once

#include "anytime/problem.hpp"

namespace anytime {

struct BarrierParams {
  double beta = 1e5;
};

// Modified barrier
//
//   B(x, λ) = f0(x) − Σ_i λ_i · log(a_i(x)),   a_i(x) = −β(f_i(x) + 1/β) + 1,
//
// defined for λ ≥ 0 and a_i > 0 (i.e. strictly feasible x). Every evaluation below throws
// InfeasiblePointError if some a_i ≤ 0 and DomainError if some λ_i < 0.

// Everything a flow step needs from one evaluation of the barrier at (x, λ).
struct BarrierTerms {
  Vector constraint_values;   // f_i(x)
  Matrix constraint_jacobian;  // rows ∇f_iᵀ
  Vector log_arguments;       // a_i
  Vector grad_x;              // ∇_x B
  Vector grad_lambda;         // ∇_λ B = −log(a)
};

void validate_barrier_params(const BarrierParams& params);

// a_i for every constraint, computed literally as −β(f_i + 1/β) + 1.
Vector log_arguments(const BarrierParams& params, const Vector& constraint_values);

BarrierTerms evaluate_barrier(const ProblemInstance& problem, const BarrierParams& params,
                              const Vector& x, const Vector& lambda);

double barrier_value(const ProblemInstance& problem, const BarrierParams& params, const Vector& x,
                     const Vector& lambda);

// ∇f0(x) + Σ_i λ_i β ∇f_i(x) / a_i
Vector barrier_grad_x(const ProblemInstance& problem, const BarrierParams& params, const Vector& x,
                      const Vector& lambda);

// −log(a_i); independent of λ.
Vector barrier_grad_lambda(const ProblemInstance& problem, const BarrierParams& params,
                           const Vector& x, const Vector& lambda);

}  // namespace anytime
