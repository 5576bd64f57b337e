// Copyright 2026 The trajopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Planar serial arm in the horizontal plane with point masses at the link
// tips, torque inputs and a single circular obstacle that interacts through
// an inelastic, approach-gated repulsive force.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "trajopt/env.hpp"

namespace trajopt {

struct Obstacle {
  Eigen::Vector2d center{2.0, 1.2};
  double radius = 0.5;
};

struct ArmCostParams {
  double torque_weight = 0.1;
  double velocity_weight = 10.0;
  double posture_weight = 1.0;  // on joints 2..L
  double terminal_log_weight = 300.0;
  double terminal_log_offset = 0.1;
  double terminal_quadratic_weight = 10.0;
  Eigen::Vector2d goal{-2.5, 1.5};
};

struct ArmParams {
  std::vector<double> link_lengths{1.0, 1.0, 1.0, 1.0};
  std::vector<double> masses{1.0, 1.0, 1.0, 1.0};
  double dt = 0.1;
  int horizon = 25;
  std::optional<Obstacle> obstacle = Obstacle{};
  double contact_epsilon = 1e-3;
  ArmCostParams costs;
  Vector initial_q = Vector::Zero(4);
  Vector initial_qdot = Vector::Zero(4);

  int links() const { return static_cast<int>(link_lengths.size()); }
  /// Throws std::invalid_argument when sizes disagree or values are out of range.
  void validate() const;
};

/// Joint positions p_1..p_L as columns (p_L is the end effector), plus the
/// absolute link angles theta_k = q_1 + ... + q_k.
struct ArmKinematics {
  Eigen::Matrix2Xd points;
  Vector absolute_angles;

  Eigen::Vector2d end_effector() const { return points.col(points.cols() - 1); }
  /// Start of link `link` (the base for link 0).
  Eigen::Vector2d link_start(int link) const {
    return link == 0 ? Eigen::Vector2d::Zero() : Eigen::Vector2d(points.col(link - 1));
  }
};

ArmKinematics arm_kinematics(const ArmParams& params, const Vector& q);

/// 2 x L position Jacobian of the tip of link `link` (0-based).
Eigen::Matrix2Xd point_jacobian(const ArmParams& params, const Vector& q, int link);

/// M(q) = sum_i m_i J_i^T J_i.
Matrix arm_mass_matrix(const ArmParams& params, const Vector& q);

/// Velocity-product term C(q, qdot) qdot = sum_i m_i J_i^T (dJ_i/dt) qdot.
Vector arm_velocity_terms(const ArmParams& params, const Vector& q, const Vector& qdot);

struct ContactResult {
  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  /// Outward vector from the obstacle surface to the nearest arm point, with
  /// its length clamped below by the contact epsilon.
  Eigen::Vector2d distance_vector = Eigen::Vector2d::Zero();
  Eigen::Vector2d contact_point = Eigen::Vector2d::Zero();
  Eigen::Matrix2Xd jacobian;
  int link = -1;
  double segment_parameter = 0.0;
  bool active = false;

  /// Generalised joint torque J_c^T F_c.
  Vector joint_torque() const { return jacobian.transpose() * force; }
};

/// Nearest point over all link segments and the gated force
/// F_c = d_c / |d_c|^3 * H(-d_c^T J_c qdot), with H(0) = 1.
ContactResult contact_force(const ArmParams& params, const Vector& q, const Vector& qdot);

class ArmEnv final : public EnvModel {
 public:
  explicit ArmEnv(ArmParams params);

  const ArmParams& params() const { return params_; }

  int state_dim() const override { return 2 * params_.links(); }
  int action_dim() const override { return params_.links(); }
  int horizon() const override { return params_.horizon; }

  Vector initial_state() const override;
  /// Semi-implicit Euler: qdot' = qdot + qddot dt, q' = q + qdot' dt.
  Vector step(int n, const Vector& state, const Vector& action) const override;
  double running_cost(int n, const Vector& state, const Vector& action) const override;
  double terminal_cost(const Vector& state) const override;
  std::optional<double> goal_distance(const Vector& terminal_state) const override;

  Vector acceleration(const Vector& q, const Vector& qdot, const Vector& torque) const;
  double kinetic_energy(const Vector& state) const;

 private:
  ArmParams params_;
};

/// Control-affine adapter of the arm for the MPPI baseline:
/// f(s) = (qdot, M^-1 (J_c^T F_c - C qdot)), B(s) = (0; M^-1). The state cost
/// rate reproduces the velocity and posture parts of the running cost, and
/// the terminal rate is r_N / dt so that the optimiser's dt factor cancels.
class ArmControlAffine final : public ControlAffineModel {
 public:
  explicit ArmControlAffine(ArmParams params);

  int state_dim() const override { return env_.state_dim(); }
  int action_dim() const override { return env_.action_dim(); }
  int horizon() const override { return env_.horizon(); }
  double dt() const override { return env_.params().dt; }

  Vector initial_state() const override { return env_.initial_state(); }
  Vector drift(int n, const Vector& state) const override;
  Matrix input_matrix(int n, const Vector& state) const override;
  double state_cost(int n, const Vector& state) const override;
  double terminal_state_cost(const Vector& state) const override;
  std::optional<double> goal_distance(const Vector& terminal_state) const override {
    return env_.goal_distance(terminal_state);
  }

 private:
  ArmEnv env_;
};

}  // namespace trajopt
