#include "anytime/barrier.hpp"

#include <cmath>

#include <fmt/format.h>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

void check_multipliers(const ProblemInstance& problem, const Vector& lambda) {
  if (lambda.size() != problem.num_constraints()) {
    throw DimensionError(fmt::format("multiplier vector has length {}, problem has {} constraints",
                                     lambda.size(), problem.num_constraints()));
  }
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] >= 0.0)) {
      throw DomainError(fmt::format("multiplier {} is negative: {}", i, lambda[i]));
    }
  }
}

void check_arguments(const Vector& args, const Vector& values) {
  for (Eigen::Index i = 0; i < args.size(); ++i) {
    if (!(args[i] > 0.0)) {
      throw InfeasiblePointError(static_cast<std::size_t>(i), values[i]);
    }
  }
}

}  // namespace

void validate_barrier_params(const BarrierParams& params) {
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw DomainError(fmt::format("barrier parameter beta must be > 0, got {}", params.beta));
  }
}

Vector log_arguments(const BarrierParams& params, const Vector& constraint_values) {
  const double beta = params.beta;
  return (-beta * (constraint_values.array() + 1.0 / beta) + 1.0).matrix();
}

BarrierTerms evaluate_barrier(const ProblemInstance& problem, const BarrierParams& params,
                              const Vector& x, const Vector& lambda) {
  validate_barrier_params(params);
  check_multipliers(problem, lambda);

  BarrierTerms terms;
  terms.constraint_values = problem.constraints(x);
  terms.log_arguments = log_arguments(params, terms.constraint_values);
  check_arguments(terms.log_arguments, terms.constraint_values);
  terms.constraint_jacobian = problem.constraint_jacobian(x);

  // d/dx [−λ log a] = −λ (∂a/∂x) / a = λ β ∇f / a
  const Vector weights = (params.beta * lambda.array() / terms.log_arguments.array()).matrix();
  terms.grad_x = problem.objective_gradient(x) + terms.constraint_jacobian.transpose() * weights;
  terms.grad_lambda = (-terms.log_arguments.array().log()).matrix();
  return terms;
}

double barrier_value(const ProblemInstance& problem, const BarrierParams& params, const Vector& x,
                     const Vector& lambda) {
  validate_barrier_params(params);
  check_multipliers(problem, lambda);
  const Vector values = problem.constraints(x);
  const Vector args = log_arguments(params, values);
  check_arguments(args, values);
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < args.size(); ++i) penalty += lambda[i] * std::log(args[i]);
  return problem.objective(x) - penalty;
}

Vector barrier_grad_x(const ProblemInstance& problem, const BarrierParams& params, const Vector& x,
                      const Vector& lambda) {
  return evaluate_barrier(problem, params, x, lambda).grad_x;
}

Vector barrier_grad_lambda(const ProblemInstance& problem, const BarrierParams& params,
                           const Vector& x, const Vector& lambda) {
  return evaluate_barrier(problem, params, x, lambda).grad_lambda;
}

}  // namespace anytime
