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

// Experiment configuration: JSON document with sections algorithm, env,
// optimizer, output and seeds. Loading resolves defaults, file values and the
// preset table into a fully concrete configuration.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <trajopt/arm.hpp>
#include <trajopt/oracle_envs.hpp>
#include <trajopt/policy.hpp>
#include <trajopt/runner.hpp>

namespace trajopt::app {

/// Invalid configuration value; `path()` is the dotted field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct EnvConfig {
  std::string name = "arm";  // arm | double_integrator | bowl
  ArmParams arm;
  DoubleIntegratorParams double_integrator;
  Vector bowl_target;
};

struct OptimizerConfig {
  double lambda = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  int samples = 0;
  int generations = 0;
  std::optional<int> poly_degree;
  /// Every entry of the fixed feedback gain.
  double fixed_gain = 0.0;
  UpdateMask update;
  bool time_indexed_weights = true;
  int threads = 1;
  double initial_feedforward = 0.0;
  double initial_variance = 0.0;
  /// Exploration variance of the MPPI baseline (Sigma = noise_variance * I).
  double noise_variance = 0.0;
  PsdRepairOptions repair;
  EarlyStop early_stop;
  int checkpoint_interval = 0;
};

struct OutputConfig {
  std::filesystem::path dir = "runs";
  bool dump_batches = false;
};

struct ExperimentConfig {
  std::string algorithm = "emppi";  // emppi | mppi | search
  std::string preset = "C";         // A | B | C | custom
  EnvConfig env;
  OptimizerConfig optimizer;
  OutputConfig output;
  std::vector<std::uint64_t> seeds;
};

/// Values a preset pins. Fields left empty are not owned by the preset.
struct Preset {
  std::optional<double> alpha;
  std::optional<UpdateMask> update;
  std::optional<double> fixed_gain;
};

/// The shared defaults of every preset.
OptimizerConfig default_optimizer();
/// Preset table lookup; throws ConfigError for unknown names.
Preset preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// Overwrites the fields owned by `config.preset` (no-op for custom).
void apply_preset(ExperimentConfig& config);

/// Parses a JSON document over the defaults, then applies the preset.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Defaults with the named preset applied.
ExperimentConfig default_config(const std::string& preset_name = "C");

std::string config_to_json(const ExperimentConfig& config);

/// Checks cross-field constraints and throws ConfigError with a field path.
void validate(const ExperimentConfig& config);

EmppiConfig emppi_config(const ExperimentConfig& config, std::uint64_t seed);
MppiConfig mppi_config(const ExperimentConfig& config, std::uint64_t seed);
SearchConfig search_config(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace trajopt::app
