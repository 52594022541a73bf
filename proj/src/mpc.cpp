#include "anytime/mpc.hpp"

#include <utility>
#include <vector>

#include <fmt/format.h>

#include "anytime/errors.hpp"
#include "anytime/oracle.hpp"

namespace anytime {

void validate_mpc_config(const MpcConfig& cfg, const DiscretePlant& plant) {
  const Eigen::Index nu = plant.input_dim();
  const Eigen::Index ny = plant.output_dim();
  if (cfg.horizon < 1) {
    throw ConstructionError(fmt::format("MPC horizon must be >= 1, got {}", cfg.horizon));
  }
  if (cfg.output_weight.rows() != ny || cfg.output_weight.cols() != ny) {
    throw ConstructionError(fmt::format("output weight must be {}x{}", ny, ny));
  }
  if (cfg.input_weight.rows() != nu || cfg.input_weight.cols() != nu) {
    throw ConstructionError(fmt::format("input weight must be {}x{}", nu, nu));
  }
  if (cfg.u_min.size() != nu || cfg.u_max.size() != nu) {
    throw ConstructionError(fmt::format("input bounds must have {} entries", nu));
  }
  if (!(cfg.u_min.array() < cfg.u_max.array()).all()) {
    throw ConstructionError("input bounds must satisfy u_min < u_max componentwise");
  }
  const Matrix r_sym = 0.5 * (cfg.input_weight + cfg.input_weight.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> r_eig(r_sym, Eigen::EigenvaluesOnly);
  if (!(r_eig.eigenvalues().minCoeff() > 0.0)) {
    throw ConstructionError("input weight must be positive definite");
  }
  const Matrix q_sym = 0.5 * (cfg.output_weight + cfg.output_weight.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> q_eig(q_sym, Eigen::EigenvaluesOnly);
  if (q_eig.eigenvalues().minCoeff() < -1e-12) {
    throw ConstructionError("output weight must be positive semidefinite");
  }
}

Prediction prediction_matrices(const DiscretePlant& plant, int horizon) {
  if (horizon < 1) throw ConstructionError("MPC horizon must be >= 1");
  const Eigen::Index nx = plant.state_dim();
  const Eigen::Index nu = plant.input_dim();
  const Eigen::Index N = horizon;

  // powers[k] = A^k
  std::vector<Matrix> powers(static_cast<std::size_t>(N) + 1);
  powers[0] = Matrix::Identity(nx, nx);
  for (Eigen::Index k = 1; k <= N; ++k) {
    powers[static_cast<std::size_t>(k)] = plant.A * powers[static_cast<std::size_t>(k - 1)];
  }

  Prediction pred;
  pred.phi.resize(N * nx, nx);
  pred.gamma = Matrix::Zero(N * nx, N * nu);
  for (Eigen::Index k = 0; k < N; ++k) {
    pred.phi.block(k * nx, 0, nx, nx) = powers[static_cast<std::size_t>(k + 1)];
    for (Eigen::Index j = 0; j <= k; ++j) {
      pred.gamma.block(k * nx, j * nu, nx, nu) =
          powers[static_cast<std::size_t>(k - j)] * plant.B;
    }
  }
  return pred;
}

QpData build_condensed_qp(const DiscretePlant& plant, const MpcConfig& cfg, const Vector& x0,
                          const Vector& ref_window) {
  validate_mpc_config(cfg, plant);
  const Eigen::Index nx = plant.state_dim();
  const Eigen::Index nu = plant.input_dim();
  const Eigen::Index ny = plant.output_dim();
  const Eigen::Index N = cfg.horizon;
  if (x0.size() != nx) throw DimensionError("initial state has the wrong dimension");
  if (ref_window.size() != N * ny) {
    throw DimensionError(
        fmt::format("reference window has {} entries, expected {}", ref_window.size(), N * ny));
  }

  const Prediction pred = prediction_matrices(plant, cfg.horizon);

  // Output predictions Y = C̄X; tracking weight acts on Y − r.
  Matrix c_bar = Matrix::Zero(N * ny, N * nx);
  Matrix q_bar = Matrix::Zero(N * ny, N * ny);
  Matrix r_bar = Matrix::Zero(N * nu, N * nu);
  for (Eigen::Index k = 0; k < N; ++k) {
    c_bar.block(k * ny, k * nx, ny, nx) = plant.C;
    q_bar.block(k * ny, k * ny, ny, ny) = cfg.output_weight;
    r_bar.block(k * nu, k * nu, nu, nu) = cfg.input_weight;
  }
  const Matrix output_gamma = c_bar * pred.gamma;
  const Vector free_response = c_bar * (pred.phi * x0) - ref_window;

  QpData qp;
  qp.H = output_gamma.transpose() * q_bar * output_gamma + r_bar;
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.q = output_gamma.transpose() * (q_bar * free_response);

  const Eigen::Index n_dec = N * nu;
  qp.G.resize(2 * n_dec, n_dec);
  qp.G.topRows(n_dec) = Matrix::Identity(n_dec, n_dec);
  qp.G.bottomRows(n_dec) = -Matrix::Identity(n_dec, n_dec);
  qp.h.resize(2 * n_dec);
  for (Eigen::Index k = 0; k < N; ++k) {
    qp.h.segment(k * nu, nu) = cfg.u_max;
    qp.h.segment(n_dec + k * nu, nu) = -cfg.u_min;
  }
  return qp;
}

Vector warm_start_shift(const Vector& previous, Eigen::Index input_dim) {
  if (input_dim < 1 || previous.size() % input_dim != 0) {
    throw DimensionError("input sequence length is not a multiple of the input dimension");
  }
  const Eigen::Index blocks = previous.size() / input_dim;
  if (blocks <= 1) return previous;
  Vector shifted(previous.size());
  shifted.head((blocks - 1) * input_dim) = previous.tail((blocks - 1) * input_dim);
  shifted.tail(input_dim) = previous.tail(input_dim);
  return shifted;
}

Vector box_center(const MpcConfig& cfg) {
  const Vector mid = 0.5 * (cfg.u_min + cfg.u_max);
  return mid.replicate(cfg.horizon, 1);
}

Vector reference_window(const MpcConfig& cfg, const DiscretePlant& plant, double t) {
  if (!cfg.reference) throw ConstructionError("MPC reference signal is not set");
  const Eigen::Index ny = plant.output_dim();
  Vector window(cfg.horizon * ny);
  for (int k = 0; k < cfg.horizon; ++k) {
    const Vector r = cfg.reference(t + (k + 1) * plant.period);
    if (r.size() != ny) throw DimensionError("reference signal has the wrong dimension");
    window.segment(k * ny, ny) = r;
  }
  return window;
}

Vector mpc_invoke(MpcTaskState& state, const DiscretePlant& plant, const MpcConfig& cfg,
                  const Vector& x0, double t, std::size_t budget,
                  const AnytimeSolverSettings& settings) {
  const QpData qp = build_condensed_qp(plant, cfg, x0, reference_window(cfg, plant, t));
  const ProblemInstance problem = make_qp(qp);

  Vector start = box_center(cfg);
  if (state.inputs.size() == start.size()) {
    Vector shifted = warm_start_shift(state.inputs, plant.input_dim());
    if (is_strictly_feasible(problem, shifted, 0.0)) start = std::move(shifted);
  }
  const FlowState init = default_flow_state(problem, std::move(start));
  const FlowState result =
      solve_anytime(problem, settings.barrier, settings.flow, init, budget);

  state.inputs = result.x;
  state.applied = result.x.head(plant.input_dim());
  state.last_iterations = result.iterations;
  return state.applied;
}

Vector mpc_invoke_reference(MpcTaskState& state, const DiscretePlant& plant, const MpcConfig& cfg,
                            const Vector& x0, double t) {
  const QpData qp = build_condensed_qp(plant, cfg, x0, reference_window(cfg, plant, t));
  const ReferenceSolution sol = solve_reference(qp);
  state.inputs = sol.x;
  state.applied = sol.x.head(plant.input_dim());
  state.last_iterations = static_cast<std::size_t>(sol.iterations);
  return state.applied;
}

}  // namespace anytime
