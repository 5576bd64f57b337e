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

#include "trajopt/emppi.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "trajopt/rng.hpp"

namespace trajopt {

void EmppiConfig::validate(int state_dim, int action_dim, int horizon) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("emppi: lambda must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("emppi: alpha must lie in [0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("emppi: beta must lie in (0, 1]");
  if (samples < 2) throw std::invalid_argument("emppi: at least two samples required");
  if (generations < 0) throw std::invalid_argument("emppi: generations must be nonnegative");
  if (poly_degree && (*poly_degree < 0 || *poly_degree >= horizon)) {
    throw std::invalid_argument("emppi: polynomial degree must lie in [0, horizon)");
  }
  if (fixed_gain.size() != 0 && (fixed_gain.rows() != action_dim || fixed_gain.cols() != state_dim)) {
    throw std::invalid_argument("emppi: fixed gain must be action_dim x state_dim");
  }
}

Matrix EmppiConfig::gain_or_zero(int state_dim, int action_dim) const {
  return fixed_gain.size() == 0 ? Matrix::Zero(action_dim, state_dim) : fixed_gain;
}

std::vector<JointMoments> fit_joint_moments(const RolloutBatch& batch, const WeightTable& weights,
                                            bool time_indexed) {
  const int dim = batch.state_dim + batch.action_dim;
  std::vector<JointMoments> out;
  out.reserve(static_cast<std::size_t>(batch.horizon));
  const Vector global = weights.normalized(0);
  Matrix samples(batch.samples, dim);
  for (int n = 0; n < batch.horizon; ++n) {
    const Vector w = time_indexed ? weights.normalized(n) : global;
    for (int j = 0; j < batch.samples; ++j) {
      if (w[j] == 0.0) {
        samples.row(j).setZero();
      } else {
        samples.row(j) = batch.joint_sample(j, n).transpose();
      }
    }
    out.push_back(weighted_moments(samples, w));
  }
  return out;
}

EmppiUpdate emppi_update(const LinearGaussianPolicy& policy, const RolloutBatch& batch,
                         const EmppiConfig& config) {
  const int ns = batch.state_dim;
  const int na = batch.action_dim;
  const int horizon = batch.horizon;
  config.validate(ns, na, horizon);

  WeightTable weights = emppi_logweights(batch, config.lambda, config.alpha);
  std::vector<JointMoments> moments = fit_joint_moments(batch, weights, config.time_indexed_weights);

  if (config.poly_degree) {
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    for (const JointMoments& m : moments) {
      means.push_back(m.mean);
      covariances.push_back(m.covariance);
    }
    means = poly_project(std::span<const Vector>(means), *config.poly_degree);
    covariances = poly_project(std::span<const Matrix>(covariances), *config.poly_degree);
    for (int n = 0; n < horizon; ++n) {
      moments[static_cast<std::size_t>(n)].mean = means[static_cast<std::size_t>(n)];
      moments[static_cast<std::size_t>(n)].covariance = symmetrize(covariances[static_cast<std::size_t>(n)]);
    }
  }

  const Matrix fixed_gain = config.gain_or_zero(ns, na);
  std::vector<PolicyStep> steps;
  steps.reserve(static_cast<std::size_t>(horizon));
  for (int n = 0; n < horizon; ++n) {
    const JointMoments& joint = moments[static_cast<std::size_t>(n)];
    ConditionalGaussian cond;
    if (config.mask.gain) {
      // The state block is singular wherever the state is not yet random
      // (n = 0), so it is repaired before conditioning.
      JointMoments repaired = joint;
      repaired.covariance.topLeftCorner(ns, ns) =
          psd_repair(joint.covariance.topLeftCorner(ns, ns), config.repair).matrix;
      cond = gaussian_condition(repaired, ns);
    } else {
      cond = gaussian_condition_fixed_gain(joint, ns, fixed_gain);
    }
    const PolicyStep& old = policy.step(n);
    PolicyStep next;
    next.feedforward = config.mask.feedforward ? cond.offset : old.feedforward;
    next.gain = cond.gain;
    next.covariance =
        config.mask.covariance ? psd_repair(cond.covariance, config.repair).matrix : old.covariance;
    steps.push_back(std::move(next));
  }

  LinearGaussianPolicy updated(std::move(steps));
  return {policy_smooth(updated, policy, config.beta, config.repair), std::move(weights),
          std::move(moments)};
}

std::uint64_t generation_seed(std::uint64_t seed, int generation) {
  return RngStream(seed).substream(static_cast<std::uint64_t>(generation)).key();
}

void evaluate_policy(GenerationRecord& record, const LinearGaussianPolicy& policy,
                     const EnvModel& env) {
  record.entropy_series = policy.entropy_series();
  record.entropy_sum = record.entropy_series.sum();
  try {
    const Trajectory det = mean_rollout(policy, env);
    record.det_cost = det.total_cost();
    record.goal_distance = env.goal_distance(det.states.col(det.states.cols() - 1));
  } catch (const DynamicsBlowUp&) {
    record.det_cost = std::numeric_limits<double>::quiet_NaN();
    record.goal_distance.reset();
  }
}

EmppiGeneration emppi_generation(const LinearGaussianPolicy& policy, const EnvModel& env,
                                 const EmppiConfig& config, int generation) {
  const auto start = std::chrono::steady_clock::now();
  RolloutBatch batch = simulate_batch(policy, env, config.samples,
                                      generation_seed(config.seed, generation), config.threads);
  GenerationRecord record;
  record.generation = generation;
  record.sample_costs = cost_to_go(batch).col(0);
  for (int j = 0; j < batch.samples; ++j) {
    if (batch.is_failed(j)) record.sample_costs[j] = std::numeric_limits<double>::quiet_NaN();
  }
  summarize_costs(record, config.lambda);

  std::optional<LinearGaussianPolicy> next;
  if (record.failed_samples == batch.samples) {
    record.aborted = true;
  } else {
    next = emppi_update(policy, batch, config).policy;
  }
  const LinearGaussianPolicy& result = next ? *next : policy;
  evaluate_policy(record, result, env);
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {result, std::move(record), std::move(batch)};
}

}  // namespace trajopt
