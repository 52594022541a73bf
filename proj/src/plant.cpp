#include "anytime/plant.hpp"

#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "anytime/errors.hpp"

namespace anytime {

LinearPlant dc_motor(const DcMotorParams& params) {
  const double J = params.inertia;
  const double b = params.damping;
  const double K = params.motor_constant;
  const double R = params.resistance;
  const double L = params.inductance;
  if (!(J > 0.0) || !(L > 0.0) || !(b >= 0.0) || !(R >= 0.0) || !std::isfinite(K)) {
    throw ConstructionError(
        fmt::format("invalid DC motor parameters: J={} b={} K={} R={} L={}", J, b, K, R, L));
  }
  LinearPlant plant;
  plant.A.resize(2, 2);
  plant.A << -b / J, K / J,
             -K / L, -R / L;
  plant.B.resize(2, 1);
  plant.B << 0.0, 1.0 / L;
  plant.C.resize(1, 2);
  plant.C << 1.0, 0.0;
  return plant;
}

void validate_plant(const LinearPlant& plant) {
  const Eigen::Index n = plant.A.rows();
  if (n < 1 || plant.A.cols() != n) throw ConstructionError("A must be square and non-empty");
  if (plant.B.rows() != n) throw ConstructionError("B must have as many rows as A");
  if (plant.B.cols() < 1) throw ConstructionError("plant needs at least one input");
  if (plant.C.cols() != n || plant.C.rows() < 1) {
    throw ConstructionError("C must have one column per state and at least one row");
  }
}

DiscretePlant discretize(const LinearPlant& plant, double period) {
  validate_plant(plant);
  if (!(period > 0.0)) {
    throw DomainError(fmt::format("sampling period must be > 0, got {}", period));
  }
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index nu = plant.input_dim();
  Matrix augmented = Matrix::Zero(n + nu, n + nu);
  augmented.topLeftCorner(n, n) = plant.A * period;
  augmented.topRightCorner(n, nu) = plant.B * period;
  const Matrix transition = augmented.exp();

  DiscretePlant out;
  out.A = transition.topLeftCorner(n, n);
  out.B = transition.topRightCorner(n, nu);
  out.C = plant.C;
  out.period = period;
  return out;
}

Vector simulate_step(const DiscretePlant& plant, const Vector& x, const Vector& u) {
  if (x.size() != plant.state_dim() || u.size() != plant.input_dim()) {
    throw DimensionError(fmt::format("simulate_step: x has {} (want {}), u has {} (want {})",
                                     x.size(), plant.state_dim(), u.size(), plant.input_dim()));
  }
  return plant.A * x + plant.B * u;
}

}  // namespace anytime
