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
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <trajopt/linalg.hpp>
#include <trajopt/rng.hpp>

#include "support/oracles.hpp"

namespace trajopt {
namespace {

using testing::Gen;

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

TEST(WeightedMoments, UniformPairGivesPopulationMoments) {
  Matrix x(2, 1);
  x << 0.0, 2.0;
  const JointMoments m = weighted_moments(x, Vector::Constant(2, 0.5));
  EXPECT_DOUBLE_EQ(m.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(m.covariance(0, 0), 1.0);
}

TEST(WeightedMoments, IdenticalSamplesHaveZeroCovariance) {
  Matrix x(3, 2);
  x << 1, 0, 1, 0, 1, 0;
  const JointMoments m = weighted_moments(x, Vector(Eigen::Vector3d(0.2, 0.5, 0.3)));
  EXPECT_EQ(m.mean, Vector(Eigen::Vector2d(1.0, 0.0)));
  EXPECT_EQ(m.covariance, Matrix::Zero(2, 2));
}

TEST(WeightedMoments, MatchesTwoPassOracle) {
  Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> samples;
    Matrix rows(50, 3);
    for (int j = 0; j < 50; ++j) {
      samples.push_back(gen.normal_vector(3));
      rows.row(j) = samples.back().transpose();
    }
    const Vector w = gen.weights(50);
    const auto oracle = testing::two_pass_moments(samples, {w.data(), w.data() + w.size()});
    const JointMoments m = weighted_moments(rows, w);
    EXPECT_LE(rel_err(m.mean, oracle.mean), 1e-12);
    EXPECT_LE(rel_err(m.covariance, oracle.covariance), 1e-12);
    const JointMoments by_span = weighted_moments(std::span<const Vector>(samples), w);
    EXPECT_LE(rel_err(by_span.covariance, oracle.covariance), 1e-12);
  }
}

TEST(WeightedMoments, CovarianceIsSymmetricPsd) {
  Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = gen.integer(2, 30);
    const int d = gen.integer(1, 6);
    Matrix rows(m, d);
    for (int j = 0; j < m; ++j) rows.row(j) = gen.normal_vector(d).transpose() * gen.uniform(0.1, 100.0);
    const JointMoments mo = weighted_moments(rows, gen.weights(m));
    EXPECT_EQ(mo.covariance, mo.covariance.transpose());
    EXPECT_GE(min_eigenvalue(mo.covariance), -1e-10 * std::max(1.0, mo.covariance.norm()));
  }
}

TEST(WeightedMoments, RejectsBadInput) {
  Matrix x = Matrix::Ones(3, 2);
  EXPECT_THROW(weighted_moments(x, Vector::Ones(2)), std::invalid_argument);
  EXPECT_THROW(weighted_moments(Matrix::Ones(1, 2), Vector::Ones(1)), std::invalid_argument);
  try {
    weighted_moments(x, Vector::Zero(3));
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "degenerate weights");
  }
  EXPECT_THROW(weighted_moments(x, Vector(Eigen::Vector3d(1, -1, 1))), std::invalid_argument);
}

TEST(GaussianCondition, IndependentBlocks) {
  JointMoments j{Vector(Eigen::Vector3d(1, 2, 3)), Matrix::Zero(3, 3)};
  j.covariance.diagonal() << 2, 3, 4;
  const ConditionalGaussian c = gaussian_condition(j, 1);
  EXPECT_EQ(c.gain, Matrix::Zero(2, 1));
  EXPECT_EQ(c.offset, Vector(Eigen::Vector2d(2, 3)));
  EXPECT_EQ(c.covariance, Matrix(Eigen::Vector2d(3, 4).asDiagonal()));
}

TEST(GaussianCondition, HandEvaluatedSchurComplement) {
  JointMoments j{Vector(Eigen::Vector2d(1, 2)), Matrix(2, 2)};
  j.covariance << 2, 1, 1, 2;
  const ConditionalGaussian c = gaussian_condition(j, 1);
  EXPECT_NEAR(c.gain(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(c.offset(0), 1.5, 1e-15);
  EXPECT_NEAR(c.covariance(0, 0), 1.5, 1e-15);
}

TEST(GaussianCondition, SingularStateBlock) {
  JointMoments j{Vector::Zero(3), Matrix::Identity(3, 3)};
  j.covariance(0, 0) = 0.0;
  try {
    gaussian_condition(j, 2);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "state covariance singular");
  }
}

TEST(GaussianCondition, RecoversLinearGaussianPolicy) {
  Gen gen(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int ns = gen.integer(1, 5);
    const int na = gen.integer(1, 4);
    const Vector mu_s = gen.normal_vector(ns);
    const Matrix s_ss = gen.spd(ns);
    const Vector k = gen.normal_vector(na);
    const Matrix gain = Matrix::NullaryExpr(na, ns, [&] { return gen.normal(); });
    const Matrix sigma = gen.spd(na);
    JointMoments j{Vector(ns + na), Matrix(ns + na, ns + na)};
    j.mean << mu_s, k + gain * mu_s;
    j.covariance.topLeftCorner(ns, ns) = s_ss;
    j.covariance.topRightCorner(ns, na) = s_ss * gain.transpose();
    j.covariance.bottomLeftCorner(na, ns) = gain * s_ss;
    j.covariance.bottomRightCorner(na, na) = sigma + gain * s_ss * gain.transpose();
    const ConditionalGaussian c = gaussian_condition(j, ns);
    EXPECT_LE(rel_err(c.gain, gain), 1e-8);
    EXPECT_LE(rel_err(c.offset, k), 1e-8);
    EXPECT_LE(rel_err(c.covariance, sigma), 1e-8);
  }
}

TEST(GaussianCondition, FixedGainSubstitution) {
  JointMoments j{Vector(Eigen::Vector3d(1, 2, 3)), Matrix::Identity(3, 3)};
  j.covariance(0, 2) = j.covariance(2, 0) = 0.3;
  Matrix gain(1, 2);
  gain << 0.5, -1.0;
  const ConditionalGaussian c = gaussian_condition_fixed_gain(j, 2, gain);
  EXPECT_NEAR(c.offset(0), 3.0 - (0.5 * 1.0 - 1.0 * 2.0), 1e-15);
  EXPECT_NEAR(c.covariance(0, 0), 1.0 - (0.25 + 1.0), 1e-15);
  EXPECT_EQ(c.gain, gain);
}

TEST(SampleGaussian, DegenerateCovarianceReturnsMean) {
  RngStream rng(1);
  const GaussianParams p{Vector(Eigen::Vector2d(3, -1)), 1e-12 * Matrix::Identity(2, 2)};
  EXPECT_LE((sample_gaussian(rng, p) - p.mean).norm(), 1e-5);
}

TEST(SampleGaussian, LawOfLargeNumbers) {
  RngStream rng(2);
  const GaussianParams p{Vector::Zero(2), Matrix::Identity(2, 2)};
  Matrix draws(100000, 2);
  for (int i = 0; i < draws.rows(); ++i) draws.row(i) = sample_gaussian(rng, p).transpose();
  const JointMoments m = weighted_moments(draws, Vector::Ones(draws.rows()));
  EXPECT_LE(m.mean.cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LE((m.covariance - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(SampleGaussian, SameSeedSameDraw) {
  const GaussianParams p{Vector::Zero(3), Matrix::Identity(3, 3)};
  RngStream a(99), b(99);
  const Vector x = sample_gaussian(a, p);
  const Vector y = sample_gaussian(b, p);
  EXPECT_EQ(x, y);
}

TEST(SampleGaussian, RejectsIndefiniteCovariance) {
  RngStream rng(3);
  const GaussianParams p{Vector::Zero(2), Matrix(Eigen::Vector2d(1, -1).asDiagonal())};
  try {
    sample_gaussian(rng, p);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "not positive definite");
  }
}

TEST(LogDensity, StandardNormalMode) {
  for (int d = 1; d <= 5; ++d) {
    const GaussianParams p{Vector::Zero(d), Matrix::Identity(d, d)};
    EXPECT_NEAR(log_density_gaussian(Vector::Zero(d), p), -0.5 * d * std::log(2 * std::numbers::pi), 1e-14);
  }
}

TEST(LogDensity, OneDimensionalAnalytic) {
  const GaussianParams p{Vector::Zero(1), Matrix::Identity(1, 1)};
  EXPECT_NEAR(log_density_gaussian(Vector::Ones(1), p), -0.5 - 0.5 * std::log(2 * std::numbers::pi), 1e-14);
}

TEST(LogDensity, MatchesDirectOracleAndIntegratesToOne) {
  Gen gen(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = gen.integer(1, 2);
    const GaussianParams p{gen.normal_vector(d), gen.spd(d, 0.3)};
    const Vector x = gen.normal_vector(d);
    const double oracle = std::log(testing::density(x, p.mean, p.covariance));
    EXPECT_LE(std::abs(log_density_gaussian(x, p) - oracle), 1e-6 * std::abs(oracle) + 1e-12);

    // Midpoint quadrature over +-8 standard deviations.
    const int cells = d == 1 ? 4000 : 400;
    const Vector sd = p.covariance.diagonal().cwiseSqrt();
    const Vector lo = p.mean - 8.0 * sd;
    const Vector step = 16.0 * sd / cells;
    double mass = 0.0;
    if (d == 1) {
      for (int i = 0; i < cells; ++i) {
        mass += std::exp(log_density_gaussian(Vector::Constant(1, lo(0) + (i + 0.5) * step(0)), p)) * step(0);
      }
    } else {
      for (int i = 0; i < cells; ++i) {
        for (int k = 0; k < cells; ++k) {
          const Vector z(Eigen::Vector2d(lo(0) + (i + 0.5) * step(0), lo(1) + (k + 0.5) * step(1)));
          mass += std::exp(log_density_gaussian(z, p)) * step(0) * step(1);
        }
      }
    }
    EXPECT_NEAR(mass, 1.0, 1e-6);
  }
}

TEST(NormalizeLogWeights, Equal) {
  const Vector w = normalize_logweights(Vector::Zero(3));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(w(i), 1.0 / 3.0);
}

TEST(NormalizeLogWeights, LargeGapDoesNotOverflow) {
  const Vector w = normalize_logweights(Vector(Eigen::Vector2d(0.0, -1000.0)));
  EXPECT_EQ(w(0), 1.0);
  EXPECT_GE(w(1), 0.0);
  EXPECT_LT(w(1), 1e-300);
}

TEST(NormalizeLogWeights, ShiftedSoftmax) {
  const Vector w = normalize_logweights(Vector(Eigen::Vector2d(-1e6, -1e6 + 1)));
  const double e = std::numbers::e;
  EXPECT_NEAR(w(0), 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(w(1), e / (1.0 + e), 1e-15);
}

TEST(NormalizeLogWeights, ShiftInvariance) {
  Gen gen(15);
  for (int trial = 0; trial < 200; ++trial) {
    // Dyadic log-weights and integer shifts keep lw + c exact.
    const Vector lw = (gen.vector(gen.integer(1, 50), -50, 50) * 1048576.0).array().round() / 1048576.0;
    const double c = std::round(gen.uniform(-1e3, 1e3));
    const Vector a = normalize_logweights(lw);
    const Vector b = normalize_logweights((lw.array() + c).matrix());
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(a.sum(), 1.0, 1e-12);
    EXPECT_GE(a.minCoeff(), 0.0);
  }
}

TEST(NormalizeLogWeights, NoViableSamples) {
  const double inf = std::numeric_limits<double>::infinity();
  try {
    normalize_logweights(Vector::Constant(3, -inf));
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "no viable samples");
  }
  const Vector w = normalize_logweights(Vector(Eigen::Vector3d(-inf, 0.0, std::nan(""))));
  EXPECT_EQ(w, Vector(Eigen::Vector3d(0, 1, 0)));
}

TEST(PolyProject, ConstantUnchanged) {
  for (int d = 0; d < 5; ++d) {
    std::vector<Vector> s(10, Vector::Constant(2, 3.5));
    const auto p = poly_project(std::span<const Vector>(s), d);
    for (const auto& v : p) EXPECT_LE((v - s.front()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PolyProject, QuadraticReproduced) {
  std::vector<Vector> s;
  for (int n = 0; n < 12; ++n) s.push_back(Vector::Constant(1, n * n));
  const auto p = poly_project(std::span<const Vector>(s), 2);
  for (int n = 0; n < 12; ++n) EXPECT_NEAR(p[n](0), n * n, 1e-10);
}

TEST(PolyProject, NoisyLineMatchesNormalEquations) {
  Gen gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    const int length = gen.integer(3, 40);
    const int degree = gen.integer(0, std::min(3, length - 1));
    Vector signal(length);
    std::vector<Matrix> mats;
    for (int n = 0; n < length; ++n) {
      signal(n) = 0.3 + 1.7 * n + gen.normal();
      mats.push_back(Matrix::Constant(1, 1, signal(n)));
    }
    const Vector oracle = testing::normal_equations_fit(signal, degree);
    const auto p = poly_project(std::span<const Matrix>(mats), degree);
    Vector out(length);
    for (int n = 0; n < length; ++n) out(n) = p[n](0, 0);
    EXPECT_LE((out - oracle).norm() / oracle.norm(), 1e-10);
  }
}

TEST(PolyProject, Idempotent) {
  Gen gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int length = gen.integer(2, 30);
    const int degree = gen.integer(0, length - 1);
    std::vector<Matrix> s;
    for (int n = 0; n < length; ++n) s.push_back(Matrix::NullaryExpr(2, 3, [&] { return gen.normal(); }));
    const auto once = poly_project(std::span<const Matrix>(s), degree);
    const auto twice = poly_project(std::span<const Matrix>(once), degree);
    for (int n = 0; n < length; ++n) EXPECT_LE((once[n] - twice[n]).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PolyProject, DegreeTooHigh) {
  std::vector<Vector> s(4, Vector::Zero(1));
  EXPECT_THROW(poly_project(std::span<const Vector>(s), 4), std::invalid_argument);
  EXPECT_THROW(poly_projection_matrix(3, -1), std::invalid_argument);
}

TEST(PsdRepair, IdentityUnchanged) {
  const PsdRepairResult r = psd_repair(Matrix::Identity(3, 3));
  EXPECT_EQ(r.shift, 0.0);
  EXPECT_EQ(r.matrix, Matrix::Identity(3, 3));
}

TEST(PsdRepair, IndefiniteShiftedFromSchedule) {
  const Matrix m = Eigen::Vector2d(1.0, -0.5).asDiagonal();
  const PsdRepairResult r = psd_repair(m, {1e-9, 1e-6, 10.0});
  EXPECT_GE(min_eigenvalue(r.matrix), 1e-9);
  EXPECT_GE(r.shift, 0.5);
  // Smallest schedule entry that works: 1e-6 * 10^k >= 0.5 + 1e-9.
  EXPECT_NEAR(r.shift, 1.0, 1e-12);
  EXPECT_EQ(r.matrix, r.matrix.transpose());
}

TEST(PsdRepair, ZeroMatrixGetsFirstShift) {
  const PsdRepairResult r = psd_repair(Matrix::Zero(3, 3), {1e-9, 1e-6, 10.0});
  EXPECT_EQ(r.shift, 1e-6);
  EXPECT_EQ(r.matrix, 1e-6 * Matrix::Identity(3, 3));
}

TEST(PsdRepair, AlwaysReachesFloor) {
  Gen gen(18);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = gen.integer(1, 8);
    Matrix m = Matrix::NullaryExpr(d, d, [&] { return gen.uniform(-5, 5); });
    m = 0.5 * (m + m.transpose());
    const PsdRepairResult r = psd_repair(m);
    EXPECT_GE(min_eigenvalue(r.matrix), 1e-9 * 0.999);
    EXPECT_EQ(r.matrix, r.matrix.transpose());
  }
}

TEST(RngStream, SubstreamsAreIndependentOfOrder) {
  RngStream root(5);
  RngStream a = root.substream(3);
  RngStream b = RngStream(5).substream(3);
  EXPECT_EQ(a.key(), b.key());
  EXPECT_EQ(a.normal(), b.normal());
  EXPECT_NE(root.substream(3).key(), root.substream(4).key());
}

}  // namespace
}  // namespace trajopt
