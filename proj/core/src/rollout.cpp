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

#include "trajopt/rollout.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "trajopt/io.hpp"
#include "trajopt/parallel.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

int RolloutBatch::failed_count() const {
  int count = 0;
  for (char f : failed) count += f != 0;
  return count;
}

Vector RolloutBatch::joint_sample(int j, int n) const {
  Vector tau(state_dim + action_dim);
  tau << states[static_cast<std::size_t>(j)].col(n), actions[static_cast<std::size_t>(j)].col(n);
  return tau;
}

RolloutBatch simulate_batch(const LinearGaussianPolicy& policy, const EnvModel& env, int samples,
                            std::uint64_t seed, int threads) {
  if (samples < 2) throw std::invalid_argument("simulate_batch: need at least two samples");
  if (policy.horizon() != env.horizon() || policy.state_dim() != env.state_dim() ||
      policy.action_dim() != env.action_dim()) {
    throw std::invalid_argument("simulate_batch: policy and environment shapes differ");
  }
  const int horizon = env.horizon();
  const int ns = env.state_dim();
  const int na = env.action_dim();

  RolloutBatch batch;
  batch.samples = samples;
  batch.horizon = horizon;
  batch.state_dim = ns;
  batch.action_dim = na;
  batch.seed = seed;
  batch.states.assign(static_cast<std::size_t>(samples), Matrix::Constant(ns, horizon + 1, kNaN));
  batch.actions.assign(static_cast<std::size_t>(samples), Matrix::Constant(na, horizon, kNaN));
  batch.stage_costs = Matrix::Constant(samples, horizon, kNaN);
  batch.terminal_costs = Vector::Constant(samples, kNaN);
  batch.log_prob = Matrix::Constant(samples, horizon, kNaN);
  batch.failed.assign(static_cast<std::size_t>(samples), 0);

  const RngStream root(seed);
  const Vector s0 = env.initial_state();

  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t idx) {
    const int j = static_cast<int>(idx);
    Matrix& states = batch.states[idx];
    Matrix& actions = batch.actions[idx];
    const RngStream sample_stream = root.substream(idx);
    states.col(0) = s0;
    try {
      for (int n = 0; n < horizon; ++n) {
        RngStream rng = sample_stream.substream(static_cast<std::uint64_t>(n));
        const Vector s = states.col(n);
        const Vector a = policy.sample(n, s, rng);
        actions.col(n) = a;
        batch.log_prob(j, n) = policy.log_prob(n, s, a);
        const double r = env.running_cost(n, s, a);
        if (!std::isfinite(r)) throw DynamicsBlowUp();
        batch.stage_costs(j, n) = r;
        states.col(n + 1) = env.step(n, s, a);
      }
      const double terminal = env.terminal_cost(states.col(horizon));
      if (!std::isfinite(terminal)) throw DynamicsBlowUp();
      batch.terminal_costs[j] = terminal;
    } catch (const DynamicsBlowUp&) {
      batch.failed[idx] = 1;
    }
  });
  return batch;
}

Matrix cost_to_go(const RolloutBatch& batch) {
  Matrix out(batch.samples, batch.horizon);
  for (int j = 0; j < batch.samples; ++j) {
    double acc = batch.terminal_costs[j];
    for (int n = batch.horizon - 1; n >= 0; --n) {
      acc += batch.stage_costs(j, n);
      out(j, n) = acc;
    }
  }
  return out;
}

WeightTable emppi_logweights(const RolloutBatch& batch, double lambda, double alpha) {
  if (!(lambda > 0.0)) throw std::invalid_argument("emppi_logweights: lambda must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("emppi_logweights: alpha must lie in [0, 1]");
  }
  const Matrix to_go = cost_to_go(batch);
  WeightTable table{Matrix(batch.samples, batch.horizon)};
  const double entropy_scale = 1.0 - alpha;
  for (int j = 0; j < batch.samples; ++j) {
    if (batch.is_failed(j)) {
      table.log_weights.row(j).setConstant(kNegInf);
      continue;
    }
    double log_prob_to_go = 0.0;
    for (int n = batch.horizon - 1; n >= 0; --n) {
      log_prob_to_go += batch.log_prob(j, n);
      double lw = -lambda * to_go(j, n);
      if (entropy_scale != 0.0) lw -= entropy_scale * log_prob_to_go;
      table.log_weights(j, n) = std::isfinite(lw) ? lw : kNegInf;
    }
  }
  return table;
}

double soft_mean(const Vector& total_costs, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("soft_mean: lambda must be positive");
  int valid = 0;
  for (double c : total_costs) valid += std::isfinite(c);
  if (valid == 0) throw std::domain_error("no viable samples");
  const Vector scaled = -lambda * total_costs;
  return -(log_sum_exp(scaled) - std::log(static_cast<double>(valid))) / lambda;
}

double soft_mean(const RolloutBatch& batch, double lambda) {
  const Matrix to_go = cost_to_go(batch);
  Vector totals = to_go.col(0);
  for (int j = 0; j < batch.samples; ++j) {
    if (batch.is_failed(j)) totals[j] = kNaN;
  }
  return soft_mean(totals, lambda);
}

Trajectory mean_rollout(const LinearGaussianPolicy& policy, const EnvModel& env) {
  const int horizon = env.horizon();
  Trajectory t{Matrix(env.state_dim(), horizon + 1), Matrix(env.action_dim(), horizon),
               Vector(horizon), 0.0};
  t.states.col(0) = env.initial_state();
  for (int n = 0; n < horizon; ++n) {
    const Vector s = t.states.col(n);
    const Vector a = policy.mean_action(n, s);
    t.actions.col(n) = a;
    t.stage_costs[n] = env.running_cost(n, s, a);
    t.states.col(n + 1) = env.step(n, s, a);
  }
  t.terminal_cost = env.terminal_cost(t.states.col(horizon));
  return t;
}

Trajectory open_loop_rollout(const std::vector<Vector>& actions, const EnvModel& env) {
  const int horizon = env.horizon();
  if (static_cast<int>(actions.size()) != horizon) {
    throw std::invalid_argument("open_loop_rollout: action sequence length differs from horizon");
  }
  Trajectory t{Matrix(env.state_dim(), horizon + 1), Matrix(env.action_dim(), horizon),
               Vector(horizon), 0.0};
  t.states.col(0) = env.initial_state();
  for (int n = 0; n < horizon; ++n) {
    const Vector s = t.states.col(n);
    t.actions.col(n) = actions[static_cast<std::size_t>(n)];
    t.stage_costs[n] = env.running_cost(n, s, actions[static_cast<std::size_t>(n)]);
    t.states.col(n + 1) = env.step(n, s, actions[static_cast<std::size_t>(n)]);
  }
  t.terminal_cost = env.terminal_cost(t.states.col(horizon));
  return t;
}

void write_batch_csv(const RolloutBatch& batch, const std::filesystem::path& path) {
  std::string out = "j,n";
  for (int i = 0; i < batch.state_dim; ++i) out += fmt::format(",s{}", i);
  for (int i = 0; i < batch.action_dim; ++i) out += fmt::format(",a{}", i);
  out += ",cost\n";
  for (int j = 0; j < batch.samples; ++j) {
    const Matrix& s = batch.states[static_cast<std::size_t>(j)];
    const Matrix& a = batch.actions[static_cast<std::size_t>(j)];
    for (int n = 0; n <= batch.horizon; ++n) {
      out += fmt::format("{},{}", j, n);
      for (int i = 0; i < batch.state_dim; ++i) out += fmt::format(",{:.12g}", s(i, n));
      for (int i = 0; i < batch.action_dim; ++i) {
        if (n < batch.horizon) {
          out += fmt::format(",{:.12g}", a(i, n));
        } else {
          out += ",";
        }
      }
      const double cost = n < batch.horizon ? batch.stage_costs(j, n) : batch.terminal_costs[j];
      out += fmt::format(",{:.12g}\n", cost);
    }
  }
  write_file_atomic(path, out);
}

}  // namespace trajopt
