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

// Dense Gaussian and weighting primitives shared by every optimiser.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trajopt/rng.hpp"

namespace trajopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct GaussianParams {
  Vector mean;
  Matrix covariance;
};

/// Joint moments of a stacked (state, action) vector, state block first.
struct JointMoments {
  Vector mean;
  Matrix covariance;

  Eigen::Index dim() const { return mean.size(); }
};

/// Action-given-state Gaussian: a ~ N(offset + gain * s, covariance).
struct ConditionalGaussian {
  Vector offset;
  Matrix gain;
  Matrix covariance;
};

struct PsdRepairOptions {
  double floor = 1e-9;
  double initial_shift = 1e-6;
  double growth = 10.0;
};

struct PsdRepairResult {
  Matrix matrix;
  double shift = 0.0;
};

/// Returns (m + m^T) / 2.
Matrix symmetrize(const Matrix& m);

/// Weighted mean and covariance. `samples` holds one sample per row.
/// Weights must be nonnegative; they are divided by their sum.
JointMoments weighted_moments(const Matrix& samples, const Vector& weights);
JointMoments weighted_moments(std::span<const Vector> samples, const Vector& weights);

/// Conditions the joint on its leading `state_dim` block.
/// Throws std::domain_error("state covariance singular") when the state block
/// has an eigenvalue at or below 1e-10.
ConditionalGaussian gaussian_condition(const JointMoments& joint, Eigen::Index state_dim);

/// Same block formulas with a caller-supplied gain in place of the
/// regression gain: k = mu_a - K mu_s, Sigma = S_aa - K S_ss K^T.
ConditionalGaussian gaussian_condition_fixed_gain(const JointMoments& joint,
                                                  Eigen::Index state_dim,
                                                  const Matrix& gain);

/// mean + L z with L the lower Cholesky factor of the covariance.
Vector sample_gaussian(RngStream& rng, const GaussianParams& params);

double log_density_gaussian(const Vector& x, const GaussianParams& params);

/// Cached Cholesky factorisation for repeated sampling and density evaluation.
class GaussianFactor {
 public:
  GaussianFactor() = default;
  explicit GaussianFactor(const Matrix& covariance);

  Eigen::Index dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }
  double log_det() const { return log_det_; }

  /// L z for a standard normal draw z.
  Vector colour(RngStream& rng) const;
  /// log N(residual | 0, Sigma)
  double log_density(const Vector& residual) const;

 private:
  Matrix lower_;
  double log_det_ = 0.0;
};

/// exp(lw - max) / sum, computed without overflow. Non-finite entries
/// (NaN or -inf) get weight zero. Throws std::domain_error("no viable samples")
/// when no entry is finite.
Vector normalize_logweights(const Vector& log_weights);

/// log(sum(exp(v))) over the finite entries of v; -inf when none are finite.
double log_sum_exp(const Vector& values);

/// Orthogonal least-squares projection of a time signal onto polynomials of
/// the given degree, evaluated at every sample time. Each entry of the
/// matrices is projected independently. The basis is evaluated on the
/// normalised abscissa n / (N - 1).
std::vector<Matrix> poly_project(std::span<const Matrix> signal, int degree);
std::vector<Vector> poly_project(std::span<const Vector> signal, int degree);

/// Projection matrix P (N x N) used by poly_project; output_n = sum_m P(n, m) x_m.
Matrix poly_projection_matrix(Eigen::Index length, int degree);

/// Returns sigma + gamma I for the smallest gamma in the schedule
/// {0, g0, g0 * growth, g0 * growth^2, ...} whose minimum eigenvalue reaches
/// the floor.
PsdRepairResult psd_repair(const Matrix& sigma, const PsdRepairOptions& options = {});

double min_eigenvalue(const Matrix& symmetric);

}  // namespace trajopt
