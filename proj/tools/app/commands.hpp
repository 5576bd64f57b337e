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
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <trajopt/env.hpp>
#include <trajopt/record.hpp>

#include "app/config.hpp"

namespace trajopt::app {

/// A required run artifact is absent or unreadable.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  std::vector<GenerationRecord> records;
};

/// Runs one seed of the configured algorithm and writes metrics.csv,
/// entropy.csv, config.resolved.json and policy_final.json into `dir`, plus
/// deterministic.csv and final_batch.csv for dynamic environments and
/// batches/ when batch dumps are enabled.
RunSummary execute_run(const ExperimentConfig& config, std::uint64_t seed,
                       const std::filesystem::path& dir);

struct VersionSummary {
  std::string preset;
  std::vector<RunSummary> runs;
  double median_det_cost = 0.0;
  double median_entropy_sum = 0.0;
  double goal_reach_rate = 0.0;
};

/// Runs presets A, B and C over every seed into out/<preset>/seed_<s>/ and
/// writes compare.csv and runs.csv into `out`.
std::vector<VersionSummary> execute_compare(const ExperimentConfig& config,
                                            const std::filesystem::path& out);

/// Writes cost_convergence.svg, entropy.svg, entropy_heatmap.csv and, for the
/// arm, endeffector_paths.svg into the run directory.
void execute_plot(const std::filesystem::path& run_dir);

/// Goal-reach threshold on the final end-effector distance used by compare.
inline constexpr double kGoalReachThreshold = 0.1;

/// Minimum sample count suggested for covariance estimation; zero when the
/// algorithm does not estimate covariances.
int recommended_samples(const ExperimentConfig& config);

std::unique_ptr<EnvModel> make_env(const ExperimentConfig& config);

std::string metrics_csv(const std::vector<GenerationRecord>& records);
std::string entropy_csv(const std::vector<GenerationRecord>& records);

double median(std::vector<double> values);

}  // namespace trajopt::app
