#pragma once

#include "anytime/problem.hpp"

namespace anytime {

// ẋ = A x + B u,  y = C x
struct LinearPlant {
  Matrix A;
  Matrix B;
  Matrix C;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C.rows(); }
};

// x⁺ = A x + B u, sampled every `period` seconds under zero-order hold.
struct DiscretePlant {
  Matrix A;
  Matrix B;
  Matrix C;
  double period = 0.0;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C.rows(); }
};

struct DcMotorParams {
  double inertia = 0.01;          // J
  double damping = 0.1;           // b
  double motor_constant = 0.01;   // K
  double resistance = 1.0;        // R
  double inductance = 0.5;        // L
};

// Armature-controlled DC motor with state (ω, i), input voltage, output ω.
LinearPlant dc_motor(const DcMotorParams& params);

void validate_plant(const LinearPlant& plant);

// Exact ZOH discretization: exp([[A, B], [0, 0]]·Δt) = [[A_d, B_d], [0, I]].
DiscretePlant discretize(const LinearPlant& plant, double period);

Vector simulate_step(const DiscretePlant& plant, const Vector& x, const Vector& u);

}  // namespace anytime
