#pragma once

#include <cstddef>
#include <functional>

#include "anytime/barrier.hpp"
#include "anytime/flow.hpp"
#include "anytime/plant.hpp"
#include "anytime/problem.hpp"

namespace anytime {

// Reference-tracking MPC over a horizon of N samples:
//
//   min  ½ Σ_{k=1..N} (C x_k − r_k)ᵀ Q (C x_k − r_k) + ½ Σ_{k=0..N−1} u_kᵀ R u_k
//   s.t. u_min ≤ u_k ≤ u_max
struct MpcConfig {
  int horizon = 10;
  Matrix output_weight;  // Q, n_y×n_y, PSD
  Matrix input_weight;   // R, n_u×n_u, PD
  Vector u_min;
  Vector u_max;
  std::function<Vector(double)> reference;  // t ↦ desired output
};

void validate_mpc_config(const MpcConfig& cfg, const DiscretePlant& plant);

struct MpcTaskState {
  Vector inputs;   // last optimized sequence (N·n_u), empty before the first solve
  Vector applied;  // last applied input u_0
  std::size_t last_iterations = 0;
};

// Stacked predictions X = Φ x0 + Γ U with X = (x_1..x_N), U = (u_0..u_{N−1}).
struct Prediction {
  Matrix phi;    // (N·n_x)×n_x, blocks A, A², …, A^N
  Matrix gamma;  // (N·n_x)×(N·n_u), block (k, j) = A^{k−j} B for j ≤ k
};

Prediction prediction_matrices(const DiscretePlant& plant, int horizon);

// `ref_window` stacks r_1..r_N (N·n_y entries). Box bounds become 2·N·n_u rows: upper bounds
// first (U ≤ u_max), then lower bounds (−U ≤ −u_min).
QpData build_condensed_qp(const DiscretePlant& plant, const MpcConfig& cfg, const Vector& x0,
                          const Vector& ref_window);

// (u_1, …, u_{N−1}, u_{N−1})
Vector warm_start_shift(const Vector& previous, Eigen::Index input_dim);

// Midpoint of the input box repeated over the horizon; strictly interior.
Vector box_center(const MpcConfig& cfg);

// r(t + k·Δt) for k = 1..N, stacked.
Vector reference_window(const MpcConfig& cfg, const DiscretePlant& plant, double t);

struct AnytimeSolverSettings {
  BarrierParams barrier;
  FlowParams flow;
};

// Anytime MPC update: warm-started flow (box center on the first call, unit multipliers) run for
// `budget` iterations. The returned input is strictly inside the bounds for every budget.
// `t` is the time the input will be applied from; the reference window starts there.
Vector mpc_invoke(MpcTaskState& state, const DiscretePlant& plant, const MpcConfig& cfg,
                  const Vector& x0, double t, std::size_t budget,
                  const AnytimeSolverSettings& settings);

// Same update solved to optimality by the reference QP solver.
Vector mpc_invoke_reference(MpcTaskState& state, const DiscretePlant& plant, const MpcConfig& cfg,
                            const Vector& x0, double t);

}  // namespace anytime
