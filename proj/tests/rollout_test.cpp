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

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include <trajopt/arm.hpp>
#include <trajopt/io.hpp>
#include <trajopt/oracle_envs.hpp>
#include <trajopt/rollout.hpp>

#include "support/oracles.hpp"

namespace trajopt {
namespace {

using testing::Gen;

// Scalar integrator that blows up whenever the action exceeds a threshold.
class FragileEnv final : public EnvModel {
 public:
  explicit FragileEnv(double threshold) : threshold_(threshold) {}

  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int horizon() const override { return 4; }
  Vector initial_state() const override { return Vector::Zero(1); }
  Vector step(int, const Vector& s, const Vector& a) const override {
    if (a(0) > threshold_) throw DynamicsBlowUp();
    return s + a;
  }
  double running_cost(int, const Vector& s, const Vector& a) const override {
    return s.squaredNorm() + a.squaredNorm();
  }
  double terminal_cost(const Vector& s) const override { return s.squaredNorm(); }

 private:
  double threshold_;
};

RolloutBatch synthetic_batch(Gen& gen, int samples, int horizon) {
  RolloutBatch b;
  b.samples = samples;
  b.horizon = horizon;
  b.state_dim = 1;
  b.action_dim = 1;
  b.states.assign(static_cast<std::size_t>(samples), Matrix::Zero(1, horizon + 1));
  b.actions.assign(static_cast<std::size_t>(samples), Matrix::Zero(1, horizon));
  b.stage_costs = Matrix::NullaryExpr(samples, horizon, [&] { return gen.uniform(0.0, 5.0); });
  b.terminal_costs = gen.vector(samples, -2.0, 5.0);
  b.log_prob = Matrix::NullaryExpr(samples, horizon, [&] { return gen.uniform(-4.0, 1.0); });
  b.failed.assign(static_cast<std::size_t>(samples), 0);
  return b;
}

TEST(SimulateBatch, FloorCovarianceMatchesMeanRollout) {
  const ArmEnv env{ArmParams{}};
  const auto policy = LinearGaussianPolicy::constant(env.horizon(), 8, 4, 0.5, 1e-14);
  const auto batch = simulate_batch(policy, env, 5, 1);
  const auto mean = mean_rollout(policy, env);
  for (int j = 0; j < 5; ++j) {
    EXPECT_LE((batch.states[j] - mean.states).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(SimulateBatch, ThreadCountInvariant) {
  const ArmEnv env{ArmParams{}};
  const auto policy = LinearGaussianPolicy::constant(env.horizon(), 8, 4, 0.5, 0.1);
  const auto one = simulate_batch(policy, env, 40, 99, 1);
  const auto eight = simulate_batch(policy, env, 40, 99, 8);
  for (int j = 0; j < 40; ++j) {
    EXPECT_EQ(one.states[j], eight.states[j]);
    EXPECT_EQ(one.actions[j], eight.actions[j]);
  }
  EXPECT_EQ(one.stage_costs, eight.stage_costs);
  EXPECT_EQ(one.terminal_costs, eight.terminal_costs);
  EXPECT_EQ(one.log_prob, eight.log_prob);
}

TEST(SimulateBatch, SeedChangesSamples) {
  const DoubleIntegratorEnv env{DoubleIntegratorParams{}};
  const auto policy = LinearGaussianPolicy::constant(env.horizon(), 2, 1, 0.0, 1.0);
  EXPECT_NE(simulate_batch(policy, env, 4, 1).actions[0], simulate_batch(policy, env, 4, 2).actions[0]);
}

TEST(SimulateBatch, DoubleIntegratorClosedForm) {
  DoubleIntegratorParams p;
  p.initial_position = 0.2;
  p.initial_velocity = -0.7;
  const DoubleIntegratorEnv env(p);
  const auto policy = LinearGaussianPolicy::constant(p.horizon, 2, 1, 0.0, 1e-300);
  const auto batch = simulate_batch(policy, env, 3, 5);
  for (int n = 0; n <= p.horizon; ++n) {
    EXPECT_NEAR(batch.states[1](0, n), 0.2 - 0.7 * p.dt * n, 1e-12);
    EXPECT_EQ(batch.states[1](1, n), -0.7);
  }
}

TEST(SimulateBatch, ReplayIsExact) {
  const ArmEnv env{ArmParams{}};
  const auto policy = LinearGaussianPolicy::constant(env.horizon(), 8, 4, 0.0, 1.0);
  const auto batch = simulate_batch(policy, env, 10, 3);
  for (int j = 0; j < 10; ++j) {
    if (batch.is_failed(j)) continue;
    Vector s = env.initial_state();
    for (int n = 0; n < env.horizon(); ++n) {
      const Vector a = batch.actions[j].col(n);
      EXPECT_EQ(batch.stage_costs(j, n), env.running_cost(n, s, a));
      EXPECT_EQ(batch.log_prob(j, n), policy.log_prob(n, s, a));
      s = env.step(n, s, a);
      ASSERT_EQ(Vector(batch.states[j].col(n + 1)), s);
    }
    EXPECT_EQ(batch.terminal_costs(j), env.terminal_cost(s));
  }
}

TEST(SimulateBatch, FailedSamplesAreMarked) {
  const FragileEnv env(1.0);
  const auto policy = LinearGaussianPolicy::constant(4, 1, 1, 0.0, 1.0);
  const auto batch = simulate_batch(policy, env, 200, 4);
  EXPECT_GT(batch.failed_count(), 0);
  EXPECT_LT(batch.failed_count(), 200);
  const auto table = emppi_logweights(batch, 0.2, 0.95);
  for (int j = 0; j < 200; ++j) {
    const bool bad = (batch.actions[j].array() > 1.0).any();
    EXPECT_EQ(batch.is_failed(j), bad);
    if (batch.is_failed(j)) {
      EXPECT_TRUE((table.log_weights.row(j).array() == -std::numeric_limits<double>::infinity()).all());
    } else {
      EXPECT_TRUE(table.log_weights.row(j).allFinite());
    }
  }
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(table.normalized(n).sum(), 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(soft_mean(batch, 0.2)));
}

TEST(SimulateBatch, RejectsBadArguments) {
  const DoubleIntegratorEnv env{DoubleIntegratorParams{}};
  EXPECT_THROW(simulate_batch(LinearGaussianPolicy::constant(10, 2, 1, 0, 1), env, 1, 0), std::invalid_argument);
  EXPECT_THROW(simulate_batch(LinearGaussianPolicy::constant(9, 2, 1, 0, 1), env, 4, 0), std::invalid_argument);
}

TEST(CostToGo, Counting) {
  Gen gen(1);
  auto b = synthetic_batch(gen, 2, 3);
  b.stage_costs.setOnes();
  b.terminal_costs.setZero();
  const Matrix r = cost_to_go(b);
  EXPECT_EQ(r.row(0), Eigen::RowVector3d(3, 2, 1));
}

TEST(CostToGo, ZeroCosts) {
  Gen gen(2);
  auto b = synthetic_batch(gen, 3, 4);
  b.stage_costs.setZero();
  b.terminal_costs.setZero();
  EXPECT_EQ(cost_to_go(b), Matrix::Zero(3, 4));
}

TEST(CostToGo, LastStepIncludesTerminal) {
  Gen gen(3);
  const auto b = synthetic_batch(gen, 5, 6);
  const Matrix r = cost_to_go(b);
  for (int j = 0; j < 5; ++j) EXPECT_EQ(r(j, 5), b.stage_costs(j, 5) + b.terminal_costs(j));
}

TEST(CostToGo, MatchesForwardSumOracle) {
  Gen gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = synthetic_batch(gen, gen.integer(2, 30), gen.integer(1, 30));
    const Matrix fast = cost_to_go(b);
    const Matrix oracle = testing::naive_cost_to_go(b);
    EXPECT_LE((fast - oracle).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
  }
}

TEST(EmppiLogWeights, AlphaOneIsExponentiatedCost) {
  Gen gen(5);
  const auto b = synthetic_batch(gen, 20, 8);
  const auto table = emppi_logweights(b, 0.3, 1.0);
  const Matrix expected = -0.3 * testing::naive_cost_to_go(b);
  EXPECT_LE((table.log_weights - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EmppiLogWeights, IdenticalTrajectoriesAreUniform) {
  Gen gen(6);
  auto b = synthetic_batch(gen, 7, 5);
  for (int j = 1; j < 7; ++j) {
    b.stage_costs.row(j) = b.stage_costs.row(0);
    b.terminal_costs(j) = b.terminal_costs(0);
    b.log_prob.row(j) = b.log_prob.row(0);
  }
  const auto table = emppi_logweights(b, 0.2, 0.95);
  for (int n = 0; n < 5; ++n) {
    EXPECT_LE((table.normalized(n) - Vector::Constant(7, 1.0 / 7)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(EmppiLogWeights, HandBuiltTrajectories) {
  Gen gen(7);
  auto b = synthetic_batch(gen, 3, 4);
  b.stage_costs << 1.0, 2.0, 0.5, 0.25, 3.0, 0.0, 1.0, 2.0, 0.1, 0.2, 0.3, 0.4;
  b.terminal_costs << 4.0, -1.0, 2.5;
  b.log_prob << -1.0, -0.5, -2.0, 0.3, -0.1, -0.2, -0.3, -0.4, 0.5, -1.5, -2.5, 1.0;
  const auto table = emppi_logweights(b, 0.2, 0.95);
  EXPECT_LE((table.log_weights - testing::scalar_logweights(b, 0.2, 0.95)).cwiseAbs().maxCoeff(), 1e-12);
  // Sample 0, step 2: cost 0.5 + 0.25 + 4.0, log-prob -2.0 + 0.3.
  EXPECT_NEAR(table.log_weights(0, 2), -(0.2 * 4.75 + 0.05 * -1.7), 1e-14);
}

TEST(EmppiLogWeights, RandomBatchesMatchScalarOracle) {
  Gen gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = synthetic_batch(gen, gen.integer(2, 20), gen.integer(1, 20));
    const double lambda = gen.uniform(0.01, 2.0);
    const double alpha = gen.uniform(0.0, 1.0);
    const Matrix oracle = testing::scalar_logweights(b, lambda, alpha);
    EXPECT_LE((emppi_logweights(b, lambda, alpha).log_weights - oracle).cwiseAbs().maxCoeff(),
              1e-12 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
  }
}

TEST(EmppiLogWeights, ScalingConsistency) {
  Gen gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto b = synthetic_batch(gen, 10, 6);
    const double lambda = gen.uniform(0.05, 2.0);
    const double c = std::ldexp(1.0, gen.integer(-4, 4));
    const auto base = emppi_logweights(b, lambda, 1.0);
    b.stage_costs /= c;
    b.terminal_costs /= c;
    const auto scaled = emppi_logweights(b, lambda * c, 1.0);
    for (int n = 0; n < 6; ++n) {
      EXPECT_LE((base.normalized(n) - scaled.normalized(n)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(EmppiLogWeights, MonotoneAtAlphaOne) {
  Gen gen(10);
  const auto b = synthetic_batch(gen, 30, 5);
  const Matrix r = cost_to_go(b);
  const auto table = emppi_logweights(b, 0.5, 1.0);
  for (int n = 0; n < 5; ++n) {
    const Vector w = table.normalized(n);
    for (int j = 0; j < 30; ++j) {
      for (int k = 0; k < 30; ++k) {
        if (r(j, n) < r(k, n)) {
          EXPECT_GT(w(j), w(k));
        }
      }
    }
  }
}

TEST(EmppiLogWeights, RejectsBadParameters) {
  Gen gen(11);
  const auto b = synthetic_batch(gen, 3, 3);
  EXPECT_THROW(emppi_logweights(b, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(emppi_logweights(b, 1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(emppi_logweights(b, 1.0, -0.1), std::invalid_argument);
}

TEST(SoftMean, EqualCosts) {
  EXPECT_NEAR(soft_mean(Vector::Constant(5, 3.7), 0.2), 3.7, 1e-14);
}

TEST(SoftMean, LargeLambdaApproachesMinimum) {
  const Vector costs = Eigen::Vector4d(3.0, 1.0, 2.0, 5.0);
  EXPECT_NEAR(soft_mean(costs, 1e4), 1.0, 1e-3);
}

TEST(SoftMean, AnalyticTwoSample) {
  const double lambda = 0.7;
  const Vector costs = Eigen::Vector2d(0.0, std::log(2.0) / lambda);
  EXPECT_NEAR(soft_mean(costs, lambda), -std::log(0.75) / lambda, 1e-14);
}

TEST(SoftMean, Bounds) {
  Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector costs = gen.vector(gen.integer(2, 50), -100.0, 100.0);
    const double lambda = std::exp(gen.uniform(-5.0, 5.0));
    const double s = soft_mean(costs, lambda);
    EXPECT_GE(s, costs.minCoeff() - 1e-9);
    EXPECT_LE(s, costs.mean() + 1e-9);
  }
}

TEST(SoftMean, AllFailed) {
  const Vector costs = Vector::Constant(3, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(soft_mean(costs, 1.0), std::domain_error);
}

TEST(WriteBatchCsv, Layout) {
  const DoubleIntegratorEnv env{DoubleIntegratorParams{}};
  const auto policy = LinearGaussianPolicy::constant(env.horizon(), 2, 1, 0.0, 0.1);
  const auto batch = simulate_batch(policy, env, 3, 8);
  const auto path = std::filesystem::temp_directory_path() / "trajopt_batch.csv";
  write_batch_csv(batch, path);
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "j,n,s0,s1,a0,cost");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3 * (env.horizon() + 1));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace trajopt
