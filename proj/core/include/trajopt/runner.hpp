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

#include <functional>
#include <optional>
#include <vector>

#include "trajopt/emppi.hpp"
#include "trajopt/mppi.hpp"
#include "trajopt/stochastic_search.hpp"

namespace trajopt {

/// Optional stopping rules, all off by default.
struct EarlyStop {
  /// Stop once the entropy sum of the current belief drops below this value.
  std::optional<double> entropy_floor;
  /// Stop when det_cost has not improved by more than plateau_tolerance over
  /// the last plateau_window generations.
  std::optional<int> plateau_window;
  double plateau_tolerance = 1e-6;

  bool should_stop(const std::vector<GenerationRecord>& records) const;
};

struct RunOptions {
  EarlyStop early_stop;
  /// Call on_checkpoint every this many generations (0 disables).
  int checkpoint_interval = 0;
  std::function<void(int generation, const LinearGaussianPolicy&)> on_checkpoint;
  std::function<void(const GenerationRecord&)> on_record;
  std::function<void(int generation, const RolloutBatch&)> on_batch;
};

struct EmppiRun {
  LinearGaussianPolicy policy;
  std::vector<GenerationRecord> records;
};

EmppiRun run_emppi(LinearGaussianPolicy initial, const EnvModel& env, const EmppiConfig& config,
                   const RunOptions& options = {});

struct MppiRun {
  OpenLoopControls controls;
  std::vector<GenerationRecord> records;
};

MppiRun run_mppi(OpenLoopControls initial, const ControlAffineModel& model,
                 const MppiConfig& config, const RunOptions& options = {});

struct SearchRun {
  SearchState state;
  std::vector<GenerationRecord> records;
};

SearchRun run_search(SearchState initial, const Objective& objective, const SearchConfig& config,
                     const RunOptions& options = {});

/// Objective over a stacked open-loop action sequence (N * n_a entries):
/// the total cost of rolling it out in `env`. Blow-ups evaluate to +inf.
Objective open_loop_objective(const EnvModel& env);

}  // namespace trajopt
