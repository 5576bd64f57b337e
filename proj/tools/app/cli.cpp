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

#include "app/cli.hpp"

#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "app/commands.hpp"
#include "app/config.hpp"

namespace trajopt::app {

namespace {

struct Overrides {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool dump_batches = false;
  std::optional<int> generations;
  std::optional<int> samples;
  std::optional<int> threads;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON experiment configuration");
  cmd.add_option("--preset", o.preset, "Version preset")->check(CLI::IsMember({"A", "B", "C", "custom"}));
  cmd.add_option("--seed", o.seed, "Single seed (replaces the seed list)");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_flag("--dump-batches", o.dump_batches, "Write every sampled batch");
  cmd.add_option("--generations", o.generations, "Number of generations");
  cmd.add_option("--samples", o.samples, "Samples per generation");
  cmd.add_option("--threads", o.threads, "Rollout worker threads");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig config = o.config_path.empty() ? default_config("C") : load_config(o.config_path);
  if (!o.preset.empty()) {
    config.preset = o.preset;
    apply_preset(config);
  }
  if (o.seed) config.seeds = {*o.seed};
  if (!o.out.empty()) config.output.dir = o.out;
  if (o.dump_batches) config.output.dump_batches = true;
  if (o.generations) config.optimizer.generations = *o.generations;
  if (o.samples) config.optimizer.samples = *o.samples;
  if (o.threads) config.optimizer.threads = *o.threads;
  validate(config);
  return config;
}

void warn_budget(const ExperimentConfig& config, std::ostream& err) {
  const int recommended = recommended_samples(config);
  if (config.optimizer.samples < recommended) {
    err << fmt::format("warning: {} samples per generation; covariance estimation wants at least {}\n",
                       config.optimizer.samples, recommended);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sample-based trajectory optimisation experiments", "trajopt"};
  app.require_subcommand(1);
  Overrides run_opts, compare_opts;
  std::string plot_dir;
  CLI::App* run = app.add_subcommand("run", "Run one seed and write metrics and checkpoints");
  add_common(*run, run_opts);
  CLI::App* compare = app.add_subcommand("compare", "Run presets A, B and C over the seed list");
  add_common(*compare, compare_opts);
  CLI::App* plot = app.add_subcommand("plot", "Render plots for a run directory");
  plot->add_option("run_dir", plot_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const ExperimentConfig config = resolve(run_opts);
      warn_budget(config, err);
      const std::uint64_t seed = config.seeds.front();
      const RunSummary summary = execute_run(config, seed, config.output.dir);
      if (summary.records.empty()) {
        out << fmt::format("{} seed {}: no generations, outputs in {}\n", config.algorithm, seed,
                           summary.dir.string());
      } else {
        const GenerationRecord& last = summary.records.back();
        out << fmt::format("{} preset {} seed {}: {} generations, det_cost {:.6g}, entropy_sum {:.6g}",
                           config.algorithm, config.preset, seed, summary.records.size(),
                           last.det_cost, last.entropy_sum);
        if (last.goal_distance) out << fmt::format(", goal distance {:.4g}", *last.goal_distance);
        out << fmt::format("\noutputs in {}\n", summary.dir.string());
      }
    } else if (compare->parsed()) {
      const ExperimentConfig config = resolve(compare_opts);
      warn_budget(config, err);
      const auto versions = execute_compare(config, config.output.dir);
      out << "version  median_det_cost  median_entropy_sum  goal_reach_rate\n";
      for (const auto& v : versions) {
        out << fmt::format("{:<8} {:>15.6g} {:>19.6g} {:>16.2f}\n", v.preset, v.median_det_cost,
                           v.median_entropy_sum, v.goal_reach_rate);
      }
      out << fmt::format("outputs in {}\n", config.output.dir.string());
    } else if (plot->parsed()) {
      execute_plot(plot_dir);
      out << fmt::format("plots written to {}\n", plot_dir);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace trajopt::app
