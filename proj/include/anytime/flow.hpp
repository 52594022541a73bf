#pragma once

#include <cstddef>
#include <functional>

#include "anytime/barrier.hpp"
#include "anytime/problem.hpp"

namespace anytime {

enum class Integrator {
  // z⁺ = z + s·F(z)
  kForwardEuler,
  // z⁺ = z + s·(I − s·J(z))⁻¹ F(z), J the Jacobian of the projected field. First order like
  // forward Euler, but stable for the stiff barrier dynamics near active constraints.
  kLinearlyImplicitEuler,
};

struct FlowParams {
  double sigma = 10.0;
  // Virtual time advanced by one untruncated step.
  double step_size = 1e-3;
  // Accepted iterates satisfy f_i(x) < −margin.
  double margin = 1e-9;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  // solve_anytime gives up after this many consecutive rejected steps.
  int stall_limit = 10;
  Integrator integrator = Integrator::kLinearlyImplicitEuler;
};

// The complete mutable state of the anytime solver. Invariants: x is strictly feasible and
// every multiplier is non-negative.
struct FlowState {
  Vector x;
  Vector lambda;
  std::size_t iterations = 0;
  bool last_step_accepted = true;
};

// Reference saddle point used to evaluate the Lyapunov function (test instrumentation).
struct LyapunovProbe {
  Vector x;
  Vector lambda;
};

struct FlowField {
  Vector dx;
  Vector dlambda;
};

void validate_flow_params(const FlowParams& params);

// State at a caller-supplied strictly interior point with unit multipliers.
FlowState default_flow_state(const ProblemInstance& problem, Vector interior_point);

// dx = −σ ∇_x B;  dλ = σ(∇_λ B + Ψ), where Ψ_i = max(0, −∇_{λ_i} B) if λ_i = 0 and 0 otherwise.
FlowField flow_field(const ProblemInstance& problem, const BarrierParams& barrier_params,
                     const FlowParams& flow_params, const FlowState& state);

// One discrete step with feasibility backtracking. Never returns a state that violates the
// FlowState invariants; a step that cannot be made feasible leaves the state unchanged and
// clears last_step_accepted.
FlowState step(const ProblemInstance& problem, const BarrierParams& barrier_params,
               const FlowParams& flow_params, const FlowState& state);

// Polled between steps; returning true stops the solve early.
using StopPredicate = std::function<bool(const FlowState&)>;

// Runs `budget` steps from `init` (fewer if the stall limit trips or `stop` fires). Throws
// InfeasiblePointError if init.x is not strictly feasible, DomainError for negative multipliers.
FlowState solve_anytime(const ProblemInstance& problem, const BarrierParams& barrier_params,
                        const FlowParams& flow_params, const FlowState& init, std::size_t budget,
                        const StopPredicate& stop = {});

// V = ‖x − x*‖² / (2σ) + ‖λ − λ*‖² / (2σ)
double lyapunov_value(const FlowParams& flow_params, const FlowState& state,
                      const LyapunovProbe& probe);

}  // namespace anytime
