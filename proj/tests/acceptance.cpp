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

// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// nonzero only when a check cannot be evaluated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include <trajopt/arm.hpp>
#include <trajopt/emppi.hpp>
#include <trajopt/io.hpp>
#include <trajopt/oracle_envs.hpp>
#include <trajopt/runner.hpp>
#include <trajopt/stochastic_search.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "support/oracles.hpp"

namespace {

using namespace trajopt;
using testing::Gen;
namespace fs = std::filesystem;

struct Outcome {
  bool pass;
  std::string detail;
};

double median(std::vector<double> v) { return app::median(std::move(v)); }

Outcome conditioning() {
  Gen gen(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int ns = gen.integer(1, 4);
    const int na = gen.integer(1, 3);
    JointMoments joint{gen.normal_vector(ns + na), gen.spd(ns + na, 0.5)};
    const ConditionalGaussian cond = gaussian_condition(joint, ns);
    const Vector mean_s = joint.mean.head(ns);
    const Matrix cov_s = joint.covariance.topLeftCorner(ns, ns);
    for (int i = 0; i < 5; ++i) {
      const Vector s = mean_s + gen.vector(ns, -2.0, 2.0);
      for (int k = 0; k < 5; ++k) {
        const Vector a = cond.offset + cond.gain * s + gen.vector(na, -2.0, 2.0);
        Vector x(ns + na);
        x << s, a;
        const double oracle = testing::density(x, joint.mean, joint.covariance) / testing::density(s, mean_s, cov_s);
        const double value = testing::density(a, cond.offset + cond.gain * s, cond.covariance);
        worst = std::max(worst, std::abs(value - oracle) / oracle);
      }
    }
  }
  return {worst <= 1e-8, fmt::format("max rel. err {:.3g} over 100 joints x 25 grid points", worst)};
}

Outcome lqr() {
  const DoubleIntegratorParams params;
  const DoubleIntegratorEnv env(params);
  const testing::LqrSolution oracle = testing::riccati_open_loop(params);
  app::ExperimentConfig resolved = app::default_config("C");
  resolved.env.name = "double_integrator";
  resolved.optimizer.samples = 500;
  resolved.optimizer.generations = 100;
  resolved.optimizer.initial_variance = 10.0;
  std::vector<double> errors;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmppiConfig config = app::emppi_config(resolved, seed);
    const auto initial = LinearGaussianPolicy::constant(params.horizon, 2, 1, resolved.optimizer.initial_feedforward,
                                                        resolved.optimizer.initial_variance);
    const auto run = run_emppi(initial, env, config);
    const Trajectory det = mean_rollout(run.policy, env);
    const double err = (det.actions.row(0).transpose() - oracle.actions).norm() / oracle.actions.norm();
    errors.push_back(err);
    within += err <= 0.05;
  }
  return {within >= 8, fmt::format("{}/10 seeds within 5%, median rel. err {:.4f}, range [{:.4f}, {:.4f}]", within,
                                   median(errors), *std::min_element(errors.begin(), errors.end()),
                                   *std::max_element(errors.begin(), errors.end()))};
}

Outcome search() {
  Vector target(5);
  target << 1.0, -1.0, 0.5, 2.0, -0.5;
  const QuadraticBowl bowl(target);
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SearchConfig config;
    config.lambda = 1.0;
    config.alpha = 0.95;
    config.samples = 100;
    config.iterations = 150;
    config.seed = seed;
    const auto run = run_search({Vector::Zero(5), Matrix::Identity(5, 5)}, bowl, config);
    errors.push_back((run.state.mean - target).norm());
  }
  const double m = median(errors);
  return {m <= 1e-2, fmt::format("median ||mu_150 - x*|| = {:.4g} over 10 seeds", m)};
}

Outcome weight_reductions() {
  const ArmEnv env{ArmParams{}};
  const auto policy = LinearGaussianPolicy::constant(env.horizon(), 8, 4, 0.5, 0.1);
  RolloutBatch batch = simulate_batch(policy, env, 200, 17);
  const double lambda = 0.2;
  const Matrix to_go = cost_to_go(batch);
  const WeightTable alpha_one = emppi_logweights(batch, lambda, 1.0);
  double reduction = 0.0;
  for (int n = 0; n < batch.horizon; ++n) {
    const Vector raw = (-lambda * (to_go.col(n).array() - to_go.col(n).minCoeff())).exp();
    reduction = std::max(reduction, (alpha_one.normalized(n) - raw / raw.sum()).cwiseAbs().maxCoeff());
  }
  const WeightTable base = emppi_logweights(batch, lambda, 0.95);
  batch.stage_costs.array() += 7.5;
  batch.terminal_costs.array() -= 3.0;
  const WeightTable shifted = emppi_logweights(batch, lambda, 0.95);
  double shift = 0.0;
  for (int n = 0; n < batch.horizon; ++n) {
    shift = std::max(shift, (base.normalized(n) - shifted.normalized(n)).cwiseAbs().maxCoeff());
  }
  return {reduction <= 1e-12 && shift <= 1e-12,
          fmt::format("alpha = 1 max abs diff {:.3g}, cost-shift max abs diff {:.3g}", reduction, shift)};
}

// One step, one state, three discrete actions; the batch is filled directly
// since the action set is not Gaussian.
Outcome recurrence() {
  const std::vector<double> prior = {0.2, 0.5, 0.3};
  const std::vector<double> q = {1.0, 0.2, 2.0};
  const int samples = 100000;
  bool pass = true;
  double worst_sigma = 0.0;
  for (double alpha : {0.0, 0.5, 0.95}) {
    RolloutBatch batch;
    batch.samples = samples;
    batch.horizon = 1;
    batch.state_dim = 1;
    batch.action_dim = 1;
    batch.stage_costs = Matrix(samples, 1);
    batch.terminal_costs = Vector::Zero(samples);
    batch.log_prob = Matrix(samples, 1);
    batch.failed.assign(samples, 0);
    RngStream rng(404);
    std::vector<int> chosen(samples);
    for (int j = 0; j < samples; ++j) {
      const double u = rng.uniform();
      const int k = u < prior[0] ? 0 : (u < prior[0] + prior[1] ? 1 : 2);
      chosen[j] = k;
      batch.states.push_back(Matrix::Zero(1, 2));
      batch.actions.push_back(Matrix::Constant(1, 1, k));
      batch.stage_costs(j, 0) = q[k];
      batch.log_prob(j, 0) = std::log(prior[k]);
    }
    const Vector w = emppi_logweights(batch, 1.0, alpha).normalized(0);
    double z = 0.0;
    std::vector<double> exact(3);
    for (int k = 0; k < 3; ++k) z += exact[k] = std::pow(prior[k], alpha) * std::exp(-q[k]);
    for (int k = 0; k < 3; ++k) {
      exact[k] /= z;
      double estimate = 0.0;
      for (int j = 0; j < samples; ++j) estimate += chosen[j] == k ? w(j) : 0.0;
      double variance = 0.0;
      for (int j = 0; j < samples; ++j) {
        const double d = (chosen[j] == k ? 1.0 : 0.0) - estimate;
        variance += w(j) * w(j) * d * d;
      }
      const double sigmas = std::abs(estimate - exact[k]) / std::sqrt(variance);
      worst_sigma = std::max(worst_sigma, sigmas);
      pass = pass && sigmas <= 3.0;
    }
  }
  return {pass, fmt::format("worst deviation {:.2f} sigma over alpha in {{0, 0.5, 0.95}}, M = 1e5", worst_sigma)};
}

Outcome dynamics() {
  Gen gen(202);
  const ArmParams params;
  double ke = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vector q = gen.vector(4, -3.2, 3.2);
    const Vector qdot = gen.normal_vector(4);
    const double oracle = testing::fd_kinetic_energy(params, q, qdot);
    ke = std::max(ke, std::abs(0.5 * qdot.dot(arm_mass_matrix(params, q) * qdot) - oracle) / oracle);
  }
  ArmParams fine = params;
  fine.obstacle.reset();
  fine.dt = 1e-4;
  const ArmEnv env(fine);
  double drift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vector s(8);
    s << gen.vector(4, -3.2, 3.2), gen.normal_vector(4);
    const double before = env.kinetic_energy(s);
    drift = std::max(drift, std::abs(env.kinetic_energy(env.step(0, s, Vector::Zero(4))) - before) / before);
  }
  double power = -std::numeric_limits<double>::infinity();
  int active = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vector q = gen.vector(4, -3.2, 3.2);
    const Vector qdot = gen.normal_vector(4);
    const ContactResult c = contact_force(params, q, qdot);
    if (c.force.isZero(0.0)) continue;
    ++active;
    power = std::max(power, c.force.dot(c.jacobian * qdot));
  }
  return {ke <= 1e-6 && drift <= 1e-6 && power <= 0.0 && active > 0,
          fmt::format("kinetic-energy rel. err {:.3g}, energy drift {:.3g}, max contact power {:.3g} over {} contacts",
                      ke, drift, power, active)};
}

Outcome qualitative(const fs::path& out) {
  app::ExperimentConfig config = app::default_config("C");
  config.seeds.clear();
  for (std::uint64_t s = 0; s < 10; ++s) config.seeds.push_back(s);
  const auto versions = app::execute_compare(config, out);
  const auto& b = versions[1];
  const auto& c = versions[2];
  std::vector<double> b50, b200;
  for (const auto& run : b.runs) {
    b50.push_back(run.records.at(49).entropy_sum);
    b200.push_back(run.records.at(199).entropy_sum);
  }
  int reached = 0;
  std::vector<double> c_goal;
  for (const auto& run : c.runs) {
    const double d = run.records.back().goal_distance.value_or(std::numeric_limits<double>::infinity());
    c_goal.push_back(d);
    reached += d <= app::kGoalReachThreshold;
  }
  const bool ordering = c.median_det_cost < b.median_det_cost;
  const bool collapse = median(b200) < median(b50);
  const bool reach = reached >= 7;
  for (const auto& v : versions) {
    std::cout << fmt::format("  version {}: median det_cost {:.4g}, median entropy_sum {:.4g}, goal reach {:.1f}\n",
                             v.preset, v.median_det_cost, v.median_entropy_sum, v.goal_reach_rate);
  }
  return {ordering && collapse && reach,
          fmt::format("(a) C {:.4g} < B {:.4g}: {}; (b) B entropy g200 {:.4g} < g50 {:.4g}: {}; "
                      "(c) C goal reach {}/10 (median distance {:.3g}): {}",
                      c.median_det_cost, b.median_det_cost, ordering ? "yes" : "no", median(b200), median(b50),
                      collapse ? "yes" : "no", reached, median(c_goal), reach ? "yes" : "no")};
}

Outcome determinism(const fs::path& out) {
  app::ExperimentConfig config = app::default_config("C");
  config.optimizer.generations = 20;
  std::vector<std::string> metrics;
  for (int threads : {1, 2, 4, 8}) {
    config.optimizer.threads = threads;
    app::execute_run(config, 7, out / fmt::format("threads_{}", threads));
    metrics.push_back(read_file(out / fmt::format("threads_{}", threads) / "metrics.csv"));
  }
  config.optimizer.threads = 1;
  app::execute_run(config, 7, out / "repeat");
  metrics.push_back(read_file(out / "repeat" / "metrics.csv"));
  const bool same = std::all_of(metrics.begin(), metrics.end(), [&](const std::string& m) { return m == metrics[0]; });
  return {same, "metrics.csv byte-identical across threads {1, 2, 4, 8} and a repeated run"};
}

}  // namespace

int main() {
  const fs::path out = fs::temp_directory_path() / "trajopt_acceptance";
  fs::remove_all(out);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"conditioning oracle", conditioning},
      {"LQR oracle", lqr},
      {"stochastic search convergence", search},
      {"weight reductions", weight_reductions},
      {"posterior recurrence", recurrence},
      {"dynamics validity", dynamics},
      {"qualitative A/B/C reproduction", [&] { return qualitative(out / "compare"); }},
      {"determinism", [&] { return determinism(out / "determinism"); }},
  };
  int passed = 0;
  int errors = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome outcome = check();
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      passed += outcome.pass;
      std::cout << fmt::format("{} {}: {} [{:.1f} s]\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail, seconds)
                << std::flush;
    } catch (const std::exception& e) {
      ++errors;
      std::cout << fmt::format("FAIL {}: error: {}\n", name, e.what()) << std::flush;
    }
  }
  std::cout << fmt::format("{}/{} criteria passed\n", passed, criteria.size());
  fs::remove_all(out);
  return errors == 0 ? 0 : 1;
}
