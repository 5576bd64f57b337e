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

#include "trajopt/mppi.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "trajopt/emppi.hpp"
#include "trajopt/parallel.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void MppiConfig::validate(int action_dim) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("mppi: lambda must be positive");
  if (samples < 2) throw std::invalid_argument("mppi: at least two samples required");
  if (generations < 0) throw std::invalid_argument("mppi: generations must be nonnegative");
  if (noise_covariance.size() != 0 &&
      (noise_covariance.rows() != action_dim || noise_covariance.cols() != action_dim)) {
    throw std::invalid_argument("mppi: noise covariance must be action_dim x action_dim");
  }
}

Matrix MppiConfig::noise_or_identity(int action_dim) const {
  return noise_covariance.size() == 0 ? Matrix::Identity(action_dim, action_dim) : noise_covariance;
}

MppiBatch simulate_mppi_batch(const OpenLoopControls& controls, const ControlAffineModel& model,
                              const MppiConfig& config, std::uint64_t seed) {
  const int horizon = model.horizon();
  const int ns = model.state_dim();
  const int na = model.action_dim();
  config.validate(na);
  if (controls.horizon() != horizon) throw std::invalid_argument("mppi: control horizon mismatch");

  const Matrix sigma = config.noise_or_identity(na);
  const GaussianFactor noise(sigma);
  const Eigen::LLT<Matrix> sigma_llt(sigma);
  const double dt = model.dt();
  const double sqrt_dt = std::sqrt(dt);

  MppiBatch batch;
  batch.samples = config.samples;
  batch.horizon = horizon;
  batch.perturbations.assign(static_cast<std::size_t>(config.samples), Matrix::Zero(na, horizon));
  batch.states.assign(static_cast<std::size_t>(config.samples), Matrix::Constant(ns, horizon + 1, kNaN));
  batch.stage_costs = Matrix::Constant(config.samples, horizon, kNaN);
  batch.terminal_costs = Vector::Constant(config.samples, kNaN);
  batch.failed.assign(static_cast<std::size_t>(config.samples), 0);

  const RngStream root(seed);
  parallel_for(static_cast<std::size_t>(config.samples), config.threads, [&](std::size_t idx) {
    const int j = static_cast<int>(idx);
    const RngStream sample_stream = root.substream(idx);
    Matrix& states = batch.states[idx];
    states.col(0) = model.initial_state();
    try {
      for (int n = 0; n < horizon; ++n) {
        RngStream rng = sample_stream.substream(static_cast<std::uint64_t>(n));
        const Vector xi = noise.colour(rng);
        batch.perturbations[idx].col(n) = xi;
        const Vector& a = controls.actions[static_cast<std::size_t>(n)];
        const Vector s = states.col(n);
        const double r = model.state_cost(n, s) * dt +
                         0.5 * config.lambda * a.dot(sigma_llt.solve(a * dt + 2.0 * xi * sqrt_dt));
        if (!std::isfinite(r)) throw DynamicsBlowUp();
        batch.stage_costs(j, n) = r;
        states.col(n + 1) = model.step(n, s, a, xi);
      }
      const double terminal = model.terminal_state_cost(states.col(horizon)) * dt;
      if (!std::isfinite(terminal)) throw DynamicsBlowUp();
      batch.terminal_costs[j] = terminal;
    } catch (const DynamicsBlowUp&) {
      batch.failed[idx] = 1;
    }
  });
  return batch;
}

WeightTable mppi_logweights(const MppiBatch& batch, double lambda, bool time_indexed) {
  if (!(lambda > 0.0)) throw std::invalid_argument("mppi: lambda must be positive");
  WeightTable table{Matrix(batch.samples, batch.horizon)};
  for (int j = 0; j < batch.samples; ++j) {
    if (batch.is_failed(j)) {
      table.log_weights.row(j).setConstant(-std::numeric_limits<double>::infinity());
      continue;
    }
    double acc = batch.terminal_costs[j];
    for (int n = batch.horizon - 1; n >= 0; --n) {
      acc += batch.stage_costs(j, n);
      table.log_weights(j, n) = -acc / lambda;
    }
    if (!time_indexed) table.log_weights.row(j).setConstant(table.log_weights(j, 0));
  }
  return table;
}

OpenLoopControls mppi_update(const OpenLoopControls& controls,
                             const std::vector<Matrix>& perturbations, const WeightTable& weights) {
  OpenLoopControls next = controls;
  const int horizon = controls.horizon();
  for (int n = 0; n < horizon; ++n) {
    const Vector w = weights.normalized(n);
    Vector& a = next.actions[static_cast<std::size_t>(n)];
    for (std::size_t j = 0; j < perturbations.size(); ++j) {
      if (w[static_cast<Eigen::Index>(j)] == 0.0) continue;
      a.noalias() += w[static_cast<Eigen::Index>(j)] * perturbations[j].col(n);
    }
  }
  return next;
}

double mppi_deterministic_cost(const OpenLoopControls& controls, const ControlAffineModel& model,
                               const MppiConfig& config, Matrix* states) {
  const int horizon = model.horizon();
  const int na = model.action_dim();
  const Eigen::LLT<Matrix> sigma_llt(config.noise_or_identity(na));
  const double dt = model.dt();
  const Vector zero = Vector::Zero(na);
  Matrix path(model.state_dim(), horizon + 1);
  path.col(0) = model.initial_state();
  double total = 0.0;
  for (int n = 0; n < horizon; ++n) {
    const Vector& a = controls.actions[static_cast<std::size_t>(n)];
    const Vector s = path.col(n);
    total += model.state_cost(n, s) * dt + 0.5 * config.lambda * a.dot(sigma_llt.solve(a * dt));
    path.col(n + 1) = model.step(n, s, a, zero);
  }
  total += model.terminal_state_cost(path.col(horizon)) * dt;
  if (states) *states = std::move(path);
  return total;
}

MppiGeneration mppi_generation(const OpenLoopControls& controls, const ControlAffineModel& model,
                               const MppiConfig& config, int generation) {
  const auto start = std::chrono::steady_clock::now();
  const MppiBatch batch =
      simulate_mppi_batch(controls, model, config, generation_seed(config.seed, generation));

  GenerationRecord record;
  record.generation = generation;
  record.sample_costs = Vector(batch.samples);
  for (int j = 0; j < batch.samples; ++j) {
    record.sample_costs[j] =
        batch.is_failed(j) ? kNaN : batch.stage_costs.row(j).sum() + batch.terminal_costs[j];
  }
  summarize_costs(record, 1.0 / config.lambda);

  OpenLoopControls next = controls;
  if (record.failed_samples == batch.samples) {
    record.aborted = true;
  } else {
    next = mppi_update(controls, batch.perturbations,
                       mppi_logweights(batch, config.lambda, config.time_indexed_weights));
  }

  const double log_det = GaussianFactor(config.noise_or_identity(model.action_dim())).log_det();
  record.entropy_series = Vector::Constant(model.horizon(), log_det);
  record.entropy_sum = record.entropy_series.sum();
  try {
    Matrix path;
    record.det_cost = mppi_deterministic_cost(next, model, config, &path);
    record.goal_distance = model.goal_distance(path.col(path.cols() - 1));
  } catch (const DynamicsBlowUp&) {
    record.det_cost = kNaN;
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(next), std::move(record)};
}

}  // namespace trajopt
