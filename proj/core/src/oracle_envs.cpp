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

#include "trajopt/oracle_envs.hpp"

#include <cmath>
#include <stdexcept>

namespace trajopt {

void DoubleIntegratorParams::validate() const {
  if (horizon < 1) throw std::invalid_argument("double integrator: horizon must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("double integrator: dt must be positive");
  for (double w : {position_weight, velocity_weight, action_weight, terminal_position_weight,
                   terminal_velocity_weight}) {
    if (!(w >= 0.0)) throw std::invalid_argument("double integrator: weights must be nonnegative");
  }
}

DoubleIntegratorEnv::DoubleIntegratorEnv(DoubleIntegratorParams params) : params_(params) {
  params_.validate();
}

Vector DoubleIntegratorEnv::initial_state() const {
  return Eigen::Vector2d(params_.initial_position, params_.initial_velocity);
}

Vector DoubleIntegratorEnv::step(int /*n*/, const Vector& state, const Vector& action) const {
  Vector next(2);
  next[0] = state[0] + state[1] * params_.dt;
  next[1] = state[1] + action[0] * params_.dt;
  if (!next.allFinite()) throw DynamicsBlowUp();
  return next;
}

double DoubleIntegratorEnv::running_cost(int /*n*/, const Vector& state, const Vector& action) const {
  const double e = state[0] - params_.goal;
  return params_.position_weight * e * e + params_.velocity_weight * state[1] * state[1] +
         params_.action_weight * action[0] * action[0];
}

double DoubleIntegratorEnv::terminal_cost(const Vector& state) const {
  const double e = state[0] - params_.goal;
  return params_.terminal_position_weight * e * e +
         params_.terminal_velocity_weight * state[1] * state[1];
}

std::optional<double> DoubleIntegratorEnv::goal_distance(const Vector& terminal_state) const {
  return std::abs(terminal_state[0] - params_.goal);
}

DoubleIntegratorControlAffine::DoubleIntegratorControlAffine(DoubleIntegratorParams params)
    : env_(params) {}

Vector DoubleIntegratorControlAffine::drift(int /*n*/, const Vector& state) const {
  return Eigen::Vector2d(state[1], 0.0);
}

Matrix DoubleIntegratorControlAffine::input_matrix(int /*n*/, const Vector& /*state*/) const {
  return Eigen::Vector2d(0.0, 1.0);
}

double DoubleIntegratorControlAffine::state_cost(int n, const Vector& state) const {
  return env_.running_cost(n, state, Vector::Zero(1)) / env_.params().dt;
}

double DoubleIntegratorControlAffine::terminal_state_cost(const Vector& state) const {
  return env_.terminal_cost(state) / env_.params().dt;
}

}  // namespace trajopt
