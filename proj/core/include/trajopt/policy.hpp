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

#include <filesystem>
#include <string>
#include <vector>

#include "trajopt/linalg.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

/// Parameters of one time step: a ~ N(feedforward + gain * s, covariance).
struct PolicyStep {
  Vector feedforward;
  Matrix gain;
  Matrix covariance;
};

/// Which policy parameters a generation is allowed to change.
struct UpdateMask {
  bool feedforward = true;
  bool gain = true;
  bool covariance = true;

  bool operator==(const UpdateMask&) const = default;
};

/// Time-varying linear-Gaussian policy belief over a finite horizon.
/// Immutable after construction; Cholesky factors are cached per step.
class LinearGaussianPolicy {
 public:
  explicit LinearGaussianPolicy(std::vector<PolicyStep> steps);

  /// Every step gets feedforward filled with `feedforward`, a zero gain and
  /// covariance `variance * I`.
  static LinearGaussianPolicy constant(int horizon, int state_dim, int action_dim,
                                       double feedforward, double variance);

  int horizon() const { return static_cast<int>(steps_.size()); }
  int state_dim() const { return static_cast<int>(steps_.front().gain.cols()); }
  int action_dim() const { return static_cast<int>(steps_.front().feedforward.size()); }

  const PolicyStep& step(int n) const;
  const std::vector<PolicyStep>& steps() const { return steps_; }

  Vector mean_action(int n, const Vector& state) const;
  Vector sample(int n, const Vector& state, RngStream& rng) const;
  double log_prob(int n, const Vector& state, const Vector& action) const;

  /// Entry n is log det Sigma_n.
  Vector entropy_series() const;
  double entropy_sum() const { return entropy_series().sum(); }

 private:
  std::vector<PolicyStep> steps_;
  std::vector<GaussianFactor> factors_;
};

/// beta * updated + (1 - beta) * previous for every parameter, then each
/// covariance is repaired.
LinearGaussianPolicy policy_smooth(const LinearGaussianPolicy& updated,
                                   const LinearGaussianPolicy& previous, double beta,
                                   const PsdRepairOptions& repair = {});

/// Open-loop action sequence used by the MPPI baseline.
struct OpenLoopControls {
  std::vector<Vector> actions;

  int horizon() const { return static_cast<int>(actions.size()); }
};

std::string policy_to_json(const LinearGaussianPolicy& policy);
LinearGaussianPolicy policy_from_json(const std::string& text);

void save_policy(const LinearGaussianPolicy& policy, const std::filesystem::path& path);
LinearGaussianPolicy load_policy(const std::filesystem::path& path);

}  // namespace trajopt
