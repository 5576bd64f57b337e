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

#include <optional>
#include <stdexcept>
#include <string>

#include "trajopt/linalg.hpp"

namespace trajopt {

/// Metrics of one generation. Generation g (1-based) summarises the batch
/// sampled from the policy of iteration g - 1 and the policy it produced.
struct GenerationRecord {
  int generation = 0;
  Vector sample_costs;  // R_0 per sample, NaN where the sample failed
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double soft_mean = 0.0;
  double det_cost = 0.0;  // noise-free rollout of the updated policy
  Vector entropy_series;  // log det Sigma_n of the updated policy
  double entropy_sum = 0.0;
  std::optional<double> goal_distance;
  int failed_samples = 0;
  bool aborted = false;
  double wall_seconds = 0.0;
};

/// Fills min/mean/soft-mean from sample_costs, ignoring non-finite entries.
void summarize_costs(GenerationRecord& record, double lambda);

/// Error raised by a run loop, tagged with the generation that failed.
class GenerationError : public std::runtime_error {
 public:
  GenerationError(int generation, const std::string& what)
      : std::runtime_error("generation " + std::to_string(generation) + ": " + what),
        generation_(generation) {}

  int generation() const { return generation_; }

 private:
  int generation_;
};

}  // namespace trajopt
