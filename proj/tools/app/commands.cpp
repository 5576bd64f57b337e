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

#include "app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <trajopt/io.hpp>
#include <trajopt/rollout.hpp>
#include <trajopt/runner.hpp>

namespace trajopt::app {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::unique_ptr<ControlAffineModel> make_affine(const ExperimentConfig& config) {
  if (config.env.name == "arm") return std::make_unique<ArmControlAffine>(config.env.arm);
  if (config.env.name == "double_integrator") {
    return std::make_unique<DoubleIntegratorControlAffine>(config.env.double_integrator);
  }
  throw ConfigError("env.name", "mppi needs a dynamic environment");
}

std::string trajectory_csv(const Trajectory& t) {
  const auto ns = t.states.rows();
  const auto na = t.actions.rows();
  const auto horizon = t.actions.cols();
  std::string out = "n";
  for (Eigen::Index i = 0; i < ns; ++i) out += fmt::format(",s{}", i);
  for (Eigen::Index i = 0; i < na; ++i) out += fmt::format(",a{}", i);
  out += ",cost\n";
  for (Eigen::Index n = 0; n <= horizon; ++n) {
    out += std::to_string(n);
    for (Eigen::Index i = 0; i < ns; ++i) out += "," + num(t.states(i, n));
    for (Eigen::Index i = 0; i < na; ++i) out += n < horizon ? "," + num(t.actions(i, n)) : ",";
    out += "," + num(n < horizon ? t.stage_costs(n) : t.terminal_cost) + "\n";
  }
  return out;
}

LinearGaussianPolicy initial_policy(const ExperimentConfig& config, const EnvModel& env,
                                    const EmppiConfig& emppi) {
  const OptimizerConfig& o = config.optimizer;
  const int ns = env.state_dim();
  const int na = env.action_dim();
  std::vector<PolicyStep> steps(static_cast<std::size_t>(env.horizon()),
                                PolicyStep{Vector::Constant(na, o.initial_feedforward),
                                           emppi.gain_or_zero(ns, na),
                                           o.initial_variance * Matrix::Identity(na, na)});
  return LinearGaussianPolicy(std::move(steps));
}

/// Open-loop action sequence with a per-step Gaussian, as a zero-gain policy.
LinearGaussianPolicy open_loop_policy(const std::vector<Vector>& actions,
                                      const std::vector<Matrix>& covariances, int state_dim) {
  std::vector<PolicyStep> steps;
  steps.reserve(actions.size());
  for (std::size_t n = 0; n < actions.size(); ++n) {
    const auto na = actions[n].size();
    steps.push_back({actions[n], Matrix::Zero(na, state_dim), covariances[n]});
  }
  return LinearGaussianPolicy(std::move(steps));
}

std::string search_state_json(const SearchState& state) {
  nlohmann::json doc;
  doc["mean"] = std::vector<double>(state.mean.data(), state.mean.data() + state.mean.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.covariance.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(state.covariance.cols()));
    for (Eigen::Index k = 0; k < state.covariance.cols(); ++k) row[static_cast<std::size_t>(k)] = state.covariance(i, k);
    rows.push_back(row);
  }
  doc["covariance"] = rows;
  return doc.dump(2) + "\n";
}

void write_dynamic_artifacts(const LinearGaussianPolicy& final_policy, const EnvModel& env,
                             const ExperimentConfig& config, std::uint64_t seed,
                             const fs::path& dir) {
  save_policy(final_policy, dir / "policy_final.json");
  write_file_atomic(dir / "deterministic.csv", trajectory_csv(mean_rollout(final_policy, env)));
  const RolloutBatch batch =
      simulate_batch(final_policy, env, config.optimizer.samples,
                     generation_seed(seed, config.optimizer.generations + 1),
                     config.optimizer.threads);
  write_batch_csv(batch, dir / "final_batch.csv");
}

RunOptions run_options(const ExperimentConfig& config, const fs::path& dir) {
  RunOptions options;
  options.early_stop = config.optimizer.early_stop;
  options.checkpoint_interval = config.optimizer.checkpoint_interval;
  options.on_checkpoint = [dir](int g, const LinearGaussianPolicy& policy) {
    save_policy(policy, dir / "checkpoints" / fmt::format("policy_g{:04d}.json", g));
  };
  if (config.output.dump_batches) {
    options.on_batch = [dir](int g, const RolloutBatch& batch) {
      write_batch_csv(batch, dir / "batches" / fmt::format("batch_g{:04d}.csv", g));
    };
  }
  return options;
}

std::vector<GenerationRecord> run_emppi_seed(const ExperimentConfig& config, std::uint64_t seed,
                                             const fs::path& dir) {
  const auto env = make_env(config);
  const EmppiConfig c = emppi_config(config, seed);
  EmppiRun run = run_emppi(initial_policy(config, *env, c), *env, c, run_options(config, dir));
  write_dynamic_artifacts(run.policy, *env, config, seed, dir);
  return std::move(run.records);
}

std::vector<GenerationRecord> run_mppi_seed(const ExperimentConfig& config, std::uint64_t seed,
                                            const fs::path& dir) {
  const auto env = make_env(config);
  const auto model = make_affine(config);
  const MppiConfig c = mppi_config(config, seed);
  OpenLoopControls initial{std::vector<Vector>(
      static_cast<std::size_t>(model->horizon()),
      Vector::Constant(model->action_dim(), config.optimizer.initial_feedforward))};
  MppiRun run = run_mppi(std::move(initial), *model, c, run_options(config, dir));
  const std::vector<Matrix> covariances(run.controls.actions.size(),
                                        c.noise_or_identity(model->action_dim()));
  write_dynamic_artifacts(open_loop_policy(run.controls.actions, covariances, env->state_dim()),
                          *env, config, seed, dir);
  return std::move(run.records);
}

std::vector<GenerationRecord> run_search_seed(const ExperimentConfig& config, std::uint64_t seed,
                                              const fs::path& dir) {
  const SearchConfig c = search_config(config, seed);
  const OptimizerConfig& o = config.optimizer;
  if (config.env.name == "bowl") {
    const QuadraticBowl bowl(config.env.bowl_target);
    const auto dim = bowl.target().size();
    SearchState initial{Vector::Constant(dim, o.initial_feedforward),
                        o.initial_variance * Matrix::Identity(dim, dim)};
    SearchRun run = run_search(std::move(initial), bowl, c, run_options(config, dir));
    write_file_atomic(dir / "policy_final.json", search_state_json(run.state));
    return std::move(run.records);
  }
  const auto env = make_env(config);
  const int na = env->action_dim();
  const auto dim = static_cast<Eigen::Index>(env->horizon()) * na;
  SearchState initial{Vector::Constant(dim, o.initial_feedforward),
                      o.initial_variance * Matrix::Identity(dim, dim)};
  SearchRun run = run_search(std::move(initial), open_loop_objective(*env), c,
                             run_options(config, dir));
  std::vector<Vector> actions;
  std::vector<Matrix> covariances;
  for (int n = 0; n < env->horizon(); ++n) {
    actions.push_back(run.state.mean.segment(n * na, na));
    covariances.push_back(symmetrize(run.state.covariance.block(n * na, n * na, na, na)));
  }
  write_dynamic_artifacts(open_loop_policy(actions, covariances, env->state_dim()), *env, config,
                          seed, dir);
  return std::move(run.records);
}

}  // namespace

std::unique_ptr<EnvModel> make_env(const ExperimentConfig& config) {
  if (config.env.name == "arm") return std::make_unique<ArmEnv>(config.env.arm);
  if (config.env.name == "double_integrator") {
    return std::make_unique<DoubleIntegratorEnv>(config.env.double_integrator);
  }
  throw ConfigError("env.name", "environment '" + config.env.name + "' has no dynamics");
}

int recommended_samples(const ExperimentConfig& config) {
  if (config.algorithm != "emppi") return 0;
  const auto env = make_env(config);
  const double nt = env->state_dim() + env->action_dim();
  const double per_step = 0.5 * (nt * nt + 0.5 * nt);
  return static_cast<int>(std::ceil((env->horizon() - 1) * per_step / 10.0));
}

std::string metrics_csv(const std::vector<GenerationRecord>& records) {
  std::string out = "gen,min_cost,mean_cost,soft_mean,det_cost,entropy_sum\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{}\n", r.generation, num(r.min_cost), num(r.mean_cost),
                       num(r.soft_mean), num(r.det_cost), num(r.entropy_sum));
  }
  return out;
}

std::string entropy_csv(const std::vector<GenerationRecord>& records) {
  std::string out = "gen";
  const auto width = records.empty() ? 0 : records.front().entropy_series.size();
  for (Eigen::Index n = 0; n < width; ++n) out += fmt::format(",n{}", n);
  out += "\n";
  for (const auto& r : records) {
    out += std::to_string(r.generation);
    for (Eigen::Index n = 0; n < r.entropy_series.size(); ++n) out += "," + num(r.entropy_series(n));
    out += "\n";
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end(), [](double a, double b) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a < b;
  });
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

RunSummary execute_run(const ExperimentConfig& config, std::uint64_t seed, const fs::path& dir) {
  validate(config);
  fs::create_directories(dir);
  ExperimentConfig resolved = config;
  resolved.seeds = {seed};
  resolved.output.dir = dir;
  write_file_atomic(dir / "config.resolved.json", config_to_json(resolved));

  RunSummary summary{seed, dir, {}};
  if (config.algorithm == "emppi") {
    summary.records = run_emppi_seed(config, seed, dir);
  } else if (config.algorithm == "mppi") {
    summary.records = run_mppi_seed(config, seed, dir);
  } else {
    summary.records = run_search_seed(config, seed, dir);
  }
  write_file_atomic(dir / "metrics.csv", metrics_csv(summary.records));
  write_file_atomic(dir / "entropy.csv", entropy_csv(summary.records));
  return summary;
}

std::vector<VersionSummary> execute_compare(const ExperimentConfig& config, const fs::path& out) {
  if (config.algorithm != "emppi") {
    throw ConfigError("algorithm.name", "compare runs the emppi presets A, B and C");
  }
  std::vector<VersionSummary> versions;
  std::string runs_csv = "version,seed,final_det_cost,final_entropy_sum,final_goal_distance\n";
  for (const char* name : {"A", "B", "C"}) {
    ExperimentConfig version = config;
    version.preset = name;
    apply_preset(version);
    VersionSummary summary{name, {}, 0.0, 0.0, 0.0};
    std::vector<double> det, entropy;
    int reached = 0;
    for (std::uint64_t seed : config.seeds) {
      RunSummary run = execute_run(version, seed, out / name / fmt::format("seed_{}", seed));
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const GenerationRecord* last = run.records.empty() ? nullptr : &run.records.back();
      const double d = last ? last->det_cost : nan;
      const double h = last ? last->entropy_sum : nan;
      const double goal = last && last->goal_distance ? *last->goal_distance : nan;
      det.push_back(d);
      entropy.push_back(h);
      if (goal <= kGoalReachThreshold) ++reached;
      runs_csv += fmt::format("{},{},{},{},{}\n", name, seed, num(d), num(h), num(goal));
      summary.runs.push_back(std::move(run));
    }
    summary.median_det_cost = median(det);
    summary.median_entropy_sum = median(entropy);
    summary.goal_reach_rate = static_cast<double>(reached) / static_cast<double>(config.seeds.size());
    versions.push_back(std::move(summary));
  }
  std::string compare_csv = "version,seeds,median_det_cost,median_entropy_sum,goal_reach_rate\n";
  for (const auto& v : versions) {
    compare_csv += fmt::format("{},{},{},{},{}\n", v.preset, v.runs.size(), num(v.median_det_cost),
                               num(v.median_entropy_sum), num(v.goal_reach_rate));
  }
  write_file_atomic(out / "compare.csv", compare_csv);
  write_file_atomic(out / "runs.csv", runs_csv);
  return versions;
}

}  // namespace trajopt::app
