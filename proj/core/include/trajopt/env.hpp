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

#include <cmath>
#include <optional>
#include <stdexcept>

#include "trajopt/linalg.hpp"

namespace trajopt {

/// Raised by environments when integration produces non-finite values.
class DynamicsBlowUp : public std::runtime_error {
 public:
  DynamicsBlowUp() : std::runtime_error("dynamics blow-up") {}
};

/// Deterministic finite-horizon problem: s_{n+1} = step(n, s_n, a_n) with
/// running costs r_n(s, a) and a terminal cost r_N(s).
///
/// Implementations are immutable after construction and must be safe to call
/// from several threads at once.
class EnvModel {
 public:
  virtual ~EnvModel() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual Vector initial_state() const = 0;
  virtual Vector step(int n, const Vector& state, const Vector& action) const = 0;
  virtual double running_cost(int n, const Vector& state, const Vector& action) const = 0;
  virtual double terminal_cost(const Vector& state) const = 0;

  /// Task-space distance to the goal, where the environment has one.
  virtual std::optional<double> goal_distance(const Vector& /*terminal_state*/) const {
    return std::nullopt;
  }
};

/// Control-affine view used by the MPPI baseline:
///   s_{n+1} = s_n + f_n(s_n) dt + B_n(s_n) (a dt + xi sqrt(dt)).
/// The running cost is split into a state part c_n(s) and the quadratic
/// control penalty that the optimiser adds itself.
class ControlAffineModel {
 public:
  virtual ~ControlAffineModel() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual double dt() const = 0;

  virtual Vector initial_state() const = 0;
  virtual Vector drift(int n, const Vector& state) const = 0;
  virtual Matrix input_matrix(int n, const Vector& state) const = 0;
  /// c_n(s), a cost rate; the optimiser multiplies it by dt.
  virtual double state_cost(int n, const Vector& state) const = 0;
  /// c_N(s); the optimiser multiplies it by dt as well.
  virtual double terminal_state_cost(const Vector& state) const = 0;

  virtual std::optional<double> goal_distance(const Vector& /*terminal_state*/) const {
    return std::nullopt;
  }

  Vector step(int n, const Vector& state, const Vector& action, const Vector& noise) const {
    const double h = dt();
    Vector next = state + drift(n, state) * h +
                  input_matrix(n, state) * (action * h + noise * std::sqrt(h));
    if (!next.allFinite()) throw DynamicsBlowUp();
    return next;
  }
};

}  // namespace trajopt
