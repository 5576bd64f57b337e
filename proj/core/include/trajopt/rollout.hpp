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
#include <filesystem>
#include <vector>

#include "trajopt/env.hpp"
#include "trajopt/linalg.hpp"
#include "trajopt/policy.hpp"

namespace trajopt {

/// M sampled trajectories of one generation.
///
/// Sample j lives in states[j] (n_s x (N+1)) and actions[j] (n_a x N); the
/// scalar tables are indexed (j, n). A trajectory whose dynamics or costs
/// became non-finite is flagged in `failed`; its entries after the failure
/// are NaN.
struct RolloutBatch {
  int samples = 0;
  int horizon = 0;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<Matrix> states;
  std::vector<Matrix> actions;
  Matrix stage_costs;
  Vector terminal_costs;
  Matrix log_prob;
  std::vector<char> failed;
  std::uint64_t seed = 0;

  bool is_failed(int j) const { return failed[static_cast<std::size_t>(j)] != 0; }
  int failed_count() const;
  /// Stacked (s_n, a_n) of sample j.
  Vector joint_sample(int j, int n) const;
};

/// Samples M trajectories from the policy. Sample j at step n draws from the
/// stream RngStream(seed).substream(j).substream(n), so the batch does not
/// depend on the thread count.
RolloutBatch simulate_batch(const LinearGaussianPolicy& policy, const EnvModel& env, int samples,
                            std::uint64_t seed, int threads = 1);

/// R(j, n) = r_N,j + sum_{n' >= n} r_n',j, accumulated backwards.
Matrix cost_to_go(const RolloutBatch& batch);

/// Per-time unnormalised log-weights, one column per time step.
struct WeightTable {
  Matrix log_weights;  // M x N

  /// Normalised weights of column n.
  Vector normalized(int n) const { return normalize_logweights(log_weights.col(n)); }
};

/// log w(j, n) = -lambda R(j, n) - (1 - alpha) sum_{n' >= n} log pi(j, n').
/// Failed samples get -inf.
WeightTable emppi_logweights(const RolloutBatch& batch, double lambda, double alpha);

/// -(1/lambda) log((1/M) sum_j exp(-lambda R_j)) over the finite costs.
double soft_mean(const Vector& total_costs, double lambda);
double soft_mean(const RolloutBatch& batch, double lambda);

/// A single noise-free trajectory.
struct Trajectory {
  Matrix states;   // n_s x (N+1)
  Matrix actions;  // n_a x N
  Vector stage_costs;
  double terminal_cost = 0.0;

  double total_cost() const { return stage_costs.sum() + terminal_cost; }
};

/// Rolls out a_n = k_n + K_n s_n.
Trajectory mean_rollout(const LinearGaussianPolicy& policy, const EnvModel& env);
/// Rolls out a fixed action sequence.
Trajectory open_loop_rollout(const std::vector<Vector>& actions, const EnvModel& env);

/// Columnar dump, one row per (j, n): j, n, s..., a..., cost. The row n = N
/// carries the terminal state with empty action columns and the terminal cost.
void write_batch_csv(const RolloutBatch& batch, const std::filesystem::path& path);

}  // namespace trajopt
