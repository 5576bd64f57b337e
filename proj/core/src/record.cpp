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

#include "trajopt/record.hpp"

#include <cmath>
#include <limits>

#include "trajopt/rollout.hpp"

namespace trajopt {

void summarize_costs(GenerationRecord& record, double lambda) {
  double lowest = std::numeric_limits<double>::infinity();
  double total = 0.0;
  int valid = 0;
  for (double c : record.sample_costs) {
    if (!std::isfinite(c)) continue;
    lowest = std::min(lowest, c);
    total += c;
    ++valid;
  }
  record.failed_samples = static_cast<int>(record.sample_costs.size()) - valid;
  if (valid == 0) {
    record.min_cost = record.mean_cost = record.soft_mean =
        std::numeric_limits<double>::quiet_NaN();
    return;
  }
  record.min_cost = lowest;
  record.mean_cost = total / valid;
  record.soft_mean = soft_mean(record.sample_costs, lambda);
}

}  // namespace trajopt
