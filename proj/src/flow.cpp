#include "anytime/flow.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

void check_state(const ProblemInstance& problem, const FlowState& state) {
  if (state.x.size() != problem.dimension()) {
    throw DimensionError(fmt::format("state x has dimension {}, problem has {}", state.x.size(),
                                     problem.dimension()));
  }
  if (state.lambda.size() != problem.num_constraints()) {
    throw DimensionError(fmt::format("state lambda has length {}, problem has {} constraints",
                                     state.lambda.size(), problem.num_constraints()));
  }
}

// Projected field plus the mask of multipliers held at zero by the normal cone.
struct ProjectedField {
  FlowField field;
  Eigen::Array<bool, Eigen::Dynamic, 1> clamped;
};

ProjectedField projected_field(const BarrierTerms& terms, const FlowParams& flow_params,
                               const FlowState& state) {
  ProjectedField out;
  out.field.dx = -flow_params.sigma * terms.grad_x;
  out.field.dlambda = flow_params.sigma * terms.grad_lambda;
  out.clamped = (state.lambda.array() == 0.0) && (out.field.dlambda.array() < 0.0);
  for (Eigen::Index i = 0; i < out.clamped.size(); ++i) {
    if (out.clamped[i]) out.field.dlambda[i] = 0.0;
  }
  return out;
}

// Pieces of the field Jacobian reused across backtracking trials.
struct Linearization {
  Matrix curvature;  // ∇²_xx B
  Matrix coupling;   // columns β∇f_i/a_i for the multipliers that are free to move
  Vector free_dlambda;
  std::vector<Eigen::Index> free_index;
};

Linearization linearize(const ProblemInstance& problem, const BarrierParams& barrier_params,
                        const BarrierTerms& terms, const ProjectedField& projected,
                        const FlowState& state) {
  const double beta = barrier_params.beta;
  const Eigen::ArrayXd inv_args = terms.log_arguments.array().inverse();
  const Vector hess_weights = (state.lambda.array() * beta * inv_args).matrix();
  const Vector outer_weights = (state.lambda.array() * beta * beta * inv_args.square()).matrix();

  Linearization lin;
  lin.curvature = problem.objective_hessian(state.x);
  if (problem.num_constraints() > 0) {
    lin.curvature += problem.weighted_constraint_hessian(state.x, hess_weights);
    lin.curvature.noalias() += terms.constraint_jacobian.transpose() *
                               outer_weights.asDiagonal() * terms.constraint_jacobian;
  }

  for (Eigen::Index i = 0; i < projected.clamped.size(); ++i) {
    if (!projected.clamped[i]) lin.free_index.push_back(i);
  }
  const auto n_free = static_cast<Eigen::Index>(lin.free_index.size());
  lin.coupling.resize(problem.dimension(), n_free);
  lin.free_dlambda.resize(n_free);
  for (Eigen::Index k = 0; k < n_free; ++k) {
    const Eigen::Index i = lin.free_index[static_cast<std::size_t>(k)];
    lin.coupling.col(k) = terms.constraint_jacobian.row(i).transpose() * (beta * inv_args[i]);
    lin.free_dlambda[k] = projected.field.dlambda[i];
  }
  return lin;
}

// Solves (I − sJ)Δ = sF by eliminating the free multipliers:
//   (I + sσK + s²σ²DDᵀ)Δx = s·F_x − s²σ·D·F_λ,   Δλ = s(F_λ + σDᵀΔx).
std::pair<Vector, Vector> implicit_increment(const Linearization& lin, const FlowField& field,
                                             double sigma, double s, Eigen::Index m) {
  const Eigen::Index p = field.dx.size();
  Matrix system = Matrix::Identity(p, p);
  system.noalias() += (s * sigma) * lin.curvature;
  if (lin.coupling.cols() > 0) {
    system.noalias() += (s * s * sigma * sigma) * (lin.coupling * lin.coupling.transpose());
  }
  Vector rhs = s * field.dx;
  if (lin.coupling.cols() > 0) rhs.noalias() -= (s * s * sigma) * (lin.coupling * lin.free_dlambda);

  Vector dx;
  const Eigen::LLT<Matrix> llt(system);
  if (llt.info() == Eigen::Success) {
    dx = llt.solve(rhs);
  } else {
    dx = system.partialPivLu().solve(rhs);
  }

  Vector dlambda = Vector::Zero(m);
  if (lin.coupling.cols() > 0) {
    const Vector free_step = s * (lin.free_dlambda + sigma * (lin.coupling.transpose() * dx));
    for (std::size_t k = 0; k < lin.free_index.size(); ++k) {
      dlambda[lin.free_index[k]] = free_step[static_cast<Eigen::Index>(k)];
    }
  }
  return {std::move(dx), std::move(dlambda)};
}

}  // namespace

void validate_flow_params(const FlowParams& params) {
  if (!(params.sigma > 0.0)) {
    throw DomainError(fmt::format("sigma must be > 0, got {}", params.sigma));
  }
  if (!(params.step_size > 0.0)) {
    throw DomainError(fmt::format("step size must be > 0, got {}", params.step_size));
  }
  if (!(params.margin >= 0.0)) {
    throw DomainError(fmt::format("feasibility margin must be >= 0, got {}", params.margin));
  }
  if (!(params.backtrack_factor > 0.0 && params.backtrack_factor < 1.0)) {
    throw DomainError(
        fmt::format("backtracking factor must lie in (0, 1), got {}", params.backtrack_factor));
  }
  if (params.max_backtracks < 0) throw DomainError("max_backtracks must be >= 0");
  if (params.stall_limit < 1) throw DomainError("stall_limit must be >= 1");
}

FlowState default_flow_state(const ProblemInstance& problem, Vector interior_point) {
  FlowState state;
  state.x = std::move(interior_point);
  state.lambda = Vector::Ones(problem.num_constraints());
  check_state(problem, state);
  return state;
}

FlowField flow_field(const ProblemInstance& problem, const BarrierParams& barrier_params,
                     const FlowParams& flow_params, const FlowState& state) {
  validate_flow_params(flow_params);
  check_state(problem, state);
  const BarrierTerms terms = evaluate_barrier(problem, barrier_params, state.x, state.lambda);
  return projected_field(terms, flow_params, state).field;
}

FlowState step(const ProblemInstance& problem, const BarrierParams& barrier_params,
               const FlowParams& flow_params, const FlowState& state) {
  validate_flow_params(flow_params);
  check_state(problem, state);
  const BarrierTerms terms = evaluate_barrier(problem, barrier_params, state.x, state.lambda);
  const ProjectedField projected = projected_field(terms, flow_params, state);
  const FlowField& field = projected.field;

  const bool implicit = flow_params.integrator == Integrator::kLinearlyImplicitEuler;
  Linearization lin;
  if (implicit) lin = linearize(problem, barrier_params, terms, projected, state);

  double s = flow_params.step_size;
  for (int attempt = 0; attempt <= flow_params.max_backtracks; ++attempt) {
    FlowState trial;
    if (implicit) {
      auto [dx, dlambda] =
          implicit_increment(lin, field, flow_params.sigma, s, problem.num_constraints());
      trial.x = state.x + dx;
      trial.lambda = state.lambda + dlambda;
    } else {
      trial.x = state.x + s * field.dx;
      trial.lambda = state.lambda + s * field.dlambda;
    }
    trial.lambda = trial.lambda.cwiseMax(0.0);

    if (trial.x.allFinite() && trial.lambda.allFinite() &&
        is_strictly_feasible(problem, trial.x, flow_params.margin)) {
      trial.iterations = state.iterations + 1;
      trial.last_step_accepted = true;
      return trial;
    }
    s *= flow_params.backtrack_factor;
  }

  FlowState unchanged = state;
  unchanged.last_step_accepted = false;
  return unchanged;
}

FlowState solve_anytime(const ProblemInstance& problem, const BarrierParams& barrier_params,
                        const FlowParams& flow_params, const FlowState& init, std::size_t budget,
                        const StopPredicate& stop) {
  validate_flow_params(flow_params);
  validate_barrier_params(barrier_params);
  check_state(problem, init);
  if (problem.num_constraints() > 0) {
    const Vector values = problem.constraints(init.x);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (!(values[i] < 0.0)) throw InfeasiblePointError(static_cast<std::size_t>(i), values[i]);
    }
  }
  for (Eigen::Index i = 0; i < init.lambda.size(); ++i) {
    if (!(init.lambda[i] >= 0.0)) {
      throw DomainError(fmt::format("initial multiplier {} is negative: {}", i, init.lambda[i]));
    }
  }

  FlowState state = init;
  int consecutive_rejects = 0;
  for (std::size_t k = 0; k < budget; ++k) {
    if (stop && stop(state)) break;
    state = step(problem, barrier_params, flow_params, state);
    if (state.last_step_accepted) {
      consecutive_rejects = 0;
    } else if (++consecutive_rejects >= flow_params.stall_limit) {
      break;
    }
  }
  return state;
}

double lyapunov_value(const FlowParams& flow_params, const FlowState& state,
                      const LyapunovProbe& probe) {
  if (state.x.size() != probe.x.size() || state.lambda.size() != probe.lambda.size()) {
    throw DimensionError(fmt::format("probe is ({}, {}) but state is ({}, {})", probe.x.size(),
                                     probe.lambda.size(), state.x.size(), state.lambda.size()));
  }
  if (!(flow_params.sigma > 0.0)) throw DomainError("sigma must be > 0");
  const double scale = 1.0 / (2.0 * flow_params.sigma);
  return scale * (state.x - probe.x).squaredNorm() + scale * (state.lambda - probe.lambda).squaredNorm();
}

}  // namespace anytime
