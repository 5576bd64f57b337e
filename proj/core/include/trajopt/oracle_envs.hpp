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

// Small problems with known solutions, used to check the optimisers.

#include <functional>

#include "trajopt/env.hpp"

namespace trajopt {

/// 1D double integrator x' = x + v dt, v' = v + a dt with quadratic costs
///   r_n = wx (x - goal)^2 + wv v^2 + wa a^2,
///   r_N = wTx (x - goal)^2 + wTv v^2.
struct DoubleIntegratorParams {
  int horizon = 10;
  double dt = 0.1;
  double goal = 1.0;
  double position_weight = 1.0;
  double velocity_weight = 0.1;
  double action_weight = 0.1;
  double terminal_position_weight = 10.0;
  double terminal_velocity_weight = 1.0;
  double initial_position = 0.0;
  double initial_velocity = 0.0;

  void validate() const;
};

class DoubleIntegratorEnv final : public EnvModel {
 public:
  explicit DoubleIntegratorEnv(DoubleIntegratorParams params);

  const DoubleIntegratorParams& params() const { return params_; }

  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int horizon() const override { return params_.horizon; }

  Vector initial_state() const override;
  Vector step(int n, const Vector& state, const Vector& action) const override;
  double running_cost(int n, const Vector& state, const Vector& action) const override;
  double terminal_cost(const Vector& state) const override;
  std::optional<double> goal_distance(const Vector& terminal_state) const override;

 private:
  DoubleIntegratorParams params_;
};

/// The same double integrator in control-affine form: f(s) = (v, 0), B = (0, 1)^T.
/// State cost rates are the state parts of r_n divided by dt.
class DoubleIntegratorControlAffine final : public ControlAffineModel {
 public:
  explicit DoubleIntegratorControlAffine(DoubleIntegratorParams params);

  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
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
  DoubleIntegratorEnv env_;
};

using Objective = std::function<double(const Vector&)>;

/// Static objective q(x) = |x - target|^2.
class QuadraticBowl {
 public:
  explicit QuadraticBowl(Vector target) : target_(std::move(target)) {}

  double operator()(const Vector& x) const { return (x - target_).squaredNorm(); }
  const Vector& target() const { return target_; }

 private:
  Vector target_;
};

}  // namespace trajopt
