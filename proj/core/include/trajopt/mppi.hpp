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

// Baseline path-integral optimiser over an open-loop action sequence with
// fixed exploration noise, for control-affine models.

#include <cstdint>

#include "trajopt/env.hpp"
#include "trajopt/policy.hpp"
#include "trajopt/record.hpp"
#include "trajopt/rollout.hpp"

namespace trajopt {

struct MppiConfig {
  double lambda = 1.0;
  /// Exploration noise covariance Sigma (n_a x n_a). Empty means identity.
  Matrix noise_covariance;
  int samples = 200;
  int generations = 200;
  /// Weight of step n uses the cost-to-go from n; when false every step uses
  /// the total trajectory cost.
  bool time_indexed_weights = true;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate(int action_dim) const;
  Matrix noise_or_identity(int action_dim) const;
};

struct MppiBatch {
  int samples = 0;
  int horizon = 0;
  std::vector<Matrix> perturbations;  // [j] n_a x N
  std::vector<Matrix> states;         // [j] n_s x (N+1)
  Matrix stage_costs;                 // M x N
  Vector terminal_costs;              // M
  std::vector<char> failed;

  bool is_failed(int j) const { return failed[static_cast<std::size_t>(j)] != 0; }
};

/// Simulates s_{n+1} = s + f dt + B (a dt + xi sqrt(dt)) with xi ~ N(0, Sigma)
/// and running cost c(s) dt + (lambda / 2) a^T Sigma^-1 (a dt + 2 xi sqrt(dt)),
/// terminal cost c_N(s) dt.
MppiBatch simulate_mppi_batch(const OpenLoopControls& controls, const ControlAffineModel& model,
                              const MppiConfig& config, std::uint64_t seed);

/// log w(j, n) = -(1/lambda) * (cost-to-go from n, or total cost).
WeightTable mppi_logweights(const MppiBatch& batch, double lambda, bool time_indexed);

/// a_n <- a_n + sum_j w(j, n) xi(j, n).
OpenLoopControls mppi_update(const OpenLoopControls& controls,
                             const std::vector<Matrix>& perturbations, const WeightTable& weights);

/// Cost of the noise-free rollout under the same cost model.
double mppi_deterministic_cost(const OpenLoopControls& controls, const ControlAffineModel& model,
                               const MppiConfig& config, Matrix* states = nullptr);

struct MppiGeneration {
  OpenLoopControls controls;
  GenerationRecord record;
};

MppiGeneration mppi_generation(const OpenLoopControls& controls, const ControlAffineModel& model,
                               const MppiConfig& config, int generation);

}  // namespace trajopt
