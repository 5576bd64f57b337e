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

#include <cstdint>
#include <optional>

#include "trajopt/env.hpp"
#include "trajopt/policy.hpp"
#include "trajopt/record.hpp"
#include "trajopt/rollout.hpp"

namespace trajopt {

/// Entropic MPPI settings. Defaults are the full algorithm with a fixed
/// (zero) feedback gain.
struct EmppiConfig {
  double lambda = 0.2;
  double alpha = 0.95;
  double beta = 0.1;
  int samples = 200;
  int generations = 200;
  /// Degree of the polynomial smoothing of the fitted time signals; none
  /// disables the projection.
  std::optional<int> poly_degree = 3;
  /// Gain used whenever mask.gain is off. Empty means zero.
  Matrix fixed_gain;
  UpdateMask mask{true, false, true};
  /// When false every time step uses the n = 0 weights.
  bool time_indexed_weights = true;
  std::uint64_t seed = 0;
  int threads = 1;
  PsdRepairOptions repair;

  void validate(int state_dim, int action_dim, int horizon) const;
  Matrix gain_or_zero(int state_dim, int action_dim) const;
};

/// Per-step likelihood-weighted joint moments of (s_n, a_n).
std::vector<JointMoments> fit_joint_moments(const RolloutBatch& batch, const WeightTable& weights,
                                            bool time_indexed);

struct EmppiUpdate {
  LinearGaussianPolicy policy;
  WeightTable weights;
  std::vector<JointMoments> moments;  // after projection
};

/// Inference step on an existing batch: weights, weighted joint moments,
/// polynomial projection, conditioning, masking, smoothing and repair.
EmppiUpdate emppi_update(const LinearGaussianPolicy& policy, const RolloutBatch& batch,
                         const EmppiConfig& config);

struct EmppiGeneration {
  LinearGaussianPolicy policy;
  GenerationRecord record;
  RolloutBatch batch;
};

/// Seed of the batch drawn in generation `generation` (1-based).
std::uint64_t generation_seed(std::uint64_t seed, int generation);

/// One full generation: sample, update, evaluate. If every sample fails the
/// previous policy is returned and the record is flagged as aborted.
EmppiGeneration emppi_generation(const LinearGaussianPolicy& policy, const EnvModel& env,
                                 const EmppiConfig& config, int generation);

/// Evaluates the noise-free rollout of a policy into det_cost, goal distance
/// and entropy fields of the record.
void evaluate_policy(GenerationRecord& record, const LinearGaussianPolicy& policy,
                     const EnvModel& env);

}  // namespace trajopt
