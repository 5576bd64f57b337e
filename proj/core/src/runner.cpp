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

#include "trajopt/runner.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace trajopt {

bool EarlyStop::should_stop(const std::vector<GenerationRecord>& records) const {
  if (records.empty()) return false;
  if (entropy_floor && records.back().entropy_sum < *entropy_floor) return true;
  if (plateau_window && *plateau_window > 0 &&
      static_cast<int>(records.size()) > *plateau_window) {
    const std::size_t last = records.size() - 1;
    const double then = records[last - static_cast<std::size_t>(*plateau_window)].det_cost;
    double best_since = std::numeric_limits<double>::infinity();
    for (std::size_t i = last + 1 - static_cast<std::size_t>(*plateau_window); i <= last; ++i) {
      best_since = std::min(best_since, records[i].det_cost);
    }
    if (std::isfinite(then) && std::isfinite(best_since) && then - best_since <= plateau_tolerance) {
      return true;
    }
  }
  return false;
}

EmppiRun run_emppi(LinearGaussianPolicy initial, const EnvModel& env, const EmppiConfig& config,
                   const RunOptions& options) {
  config.validate(env.state_dim(), env.action_dim(), env.horizon());
  EmppiRun run{std::move(initial), {}};
  for (int g = 1; g <= config.generations; ++g) {
    try {
      EmppiGeneration gen = emppi_generation(run.policy, env, config, g);
      if (options.on_batch) options.on_batch(g, gen.batch);
      run.policy = std::move(gen.policy);
      run.records.push_back(std::move(gen.record));
    } catch (const GenerationError&) {
      throw;
    } catch (const std::exception& e) {
      throw GenerationError(g, e.what());
    }
    if (options.on_record) options.on_record(run.records.back());
    if (options.checkpoint_interval > 0 && g % options.checkpoint_interval == 0 &&
        options.on_checkpoint) {
      options.on_checkpoint(g, run.policy);
    }
    if (options.early_stop.should_stop(run.records)) break;
  }
  return run;
}

MppiRun run_mppi(OpenLoopControls initial, const ControlAffineModel& model,
                 const MppiConfig& config, const RunOptions& options) {
  config.validate(model.action_dim());
  MppiRun run{std::move(initial), {}};
  for (int g = 1; g <= config.generations; ++g) {
    try {
      MppiGeneration gen = mppi_generation(run.controls, model, config, g);
      run.controls = std::move(gen.controls);
      run.records.push_back(std::move(gen.record));
    } catch (const std::exception& e) {
      throw GenerationError(g, e.what());
    }
    if (options.on_record) options.on_record(run.records.back());
    if (options.early_stop.should_stop(run.records)) break;
  }
  return run;
}

SearchRun run_search(SearchState initial, const Objective& objective, const SearchConfig& config,
                     const RunOptions& options) {
  config.validate();
  SearchRun run{std::move(initial), {}};
  for (int g = 1; g <= config.iterations; ++g) {
    const auto start = std::chrono::steady_clock::now();
    GenerationRecord record;
    record.generation = g;
    try {
      RngStream rng(generation_seed(config.seed, g));
      SearchStep step = stochastic_search_step(run.state, objective, config.lambda, config.alpha,
                                               config.samples, rng, config.repair);
      run.state = std::move(step.state);
      record.sample_costs = std::move(step.objective_values);
    } catch (const std::exception& e) {
      throw GenerationError(g, e.what());
    }
    summarize_costs(record, config.lambda);
    record.det_cost = objective(run.state.mean);
    record.entropy_series = Vector::Constant(1, GaussianFactor(run.state.covariance).log_det());
    record.entropy_sum = record.entropy_series.sum();
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.records.push_back(std::move(record));
    if (options.on_record) options.on_record(run.records.back());
    if (options.early_stop.should_stop(run.records)) break;
  }
  return run;
}

Objective open_loop_objective(const EnvModel& env) {
  return [&env](const Vector& stacked) {
    const int horizon = env.horizon();
    const int na = env.action_dim();
    std::vector<Vector> actions;
    actions.reserve(static_cast<std::size_t>(horizon));
    for (int n = 0; n < horizon; ++n) actions.push_back(stacked.segment(n * na, na));
    try {
      const double cost = open_loop_rollout(actions, env).total_cost();
      return std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
    } catch (const DynamicsBlowUp&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

}  // namespace trajopt
