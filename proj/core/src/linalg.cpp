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

#include "trajopt/linalg.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace trajopt {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)
constexpr double kSingularStateEigenvalue = 1e-10;

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

JointMoments weighted_moments(const Matrix& samples, const Vector& weights) {
  if (samples.rows() != weights.size()) {
    throw std::invalid_argument("weighted_moments: " + std::to_string(samples.rows()) +
                                " samples but " + std::to_string(weights.size()) + " weights");
  }
  if (samples.rows() < 2) {
    throw std::invalid_argument("weighted_moments: need at least two samples");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) {
      throw std::invalid_argument("weighted_moments: weights must be finite and nonnegative");
    }
    total += weights[j];
  }
  if (!(total > 0.0)) throw std::domain_error("degenerate weights");

  const Eigen::Index dim = samples.cols();
  JointMoments out{Vector::Zero(dim), Matrix::Zero(dim, dim)};
  // Zero-weight rows are skipped so that failed (non-finite) samples can stay
  // in the table.
  for (Eigen::Index j = 0; j < samples.rows(); ++j) {
    if (weights[j] == 0.0) continue;
    out.mean.noalias() += (weights[j] / total) * samples.row(j).transpose();
  }
  for (Eigen::Index j = 0; j < samples.rows(); ++j) {
    if (weights[j] == 0.0) continue;
    const Vector centred = samples.row(j).transpose() - out.mean;
    out.covariance.noalias() += (weights[j] / total) * centred * centred.transpose();
  }
  out.covariance = symmetrize(out.covariance);
  return out;
}

JointMoments weighted_moments(std::span<const Vector> samples, const Vector& weights) {
  if (samples.empty()) throw std::invalid_argument("weighted_moments: no samples");
  const Eigen::Index dim = samples.front().size();
  Matrix stacked(static_cast<Eigen::Index>(samples.size()), dim);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].size() != dim) {
      throw std::invalid_argument("weighted_moments: sample " + std::to_string(j) +
                                  " has mismatched dimension");
    }
    stacked.row(static_cast<Eigen::Index>(j)) = samples[j].transpose();
  }
  return weighted_moments(stacked, weights);
}

ConditionalGaussian gaussian_condition(const JointMoments& joint, Eigen::Index state_dim) {
  const Eigen::Index dim = joint.dim();
  if (state_dim < 0 || state_dim > dim || joint.covariance.rows() != dim ||
      joint.covariance.cols() != dim) {
    throw std::invalid_argument("gaussian_condition: inconsistent dimensions");
  }
  const Eigen::Index action_dim = dim - state_dim;
  if (state_dim == 0) {
    return {joint.mean, Matrix::Zero(action_dim, 0), joint.covariance};
  }
  const Matrix s_ss = symmetrize(joint.covariance.topLeftCorner(state_dim, state_dim));
  const Matrix s_sa = joint.covariance.topRightCorner(state_dim, action_dim);
  const Matrix s_aa = joint.covariance.bottomRightCorner(action_dim, action_dim);

  if (!s_ss.allFinite() || min_eigenvalue(s_ss) <= kSingularStateEigenvalue) {
    throw std::domain_error("state covariance singular");
  }
  Eigen::LLT<Matrix> llt(s_ss);
  if (llt.info() != Eigen::Success) throw std::domain_error("state covariance singular");

  ConditionalGaussian out;
  out.gain = llt.solve(s_sa).transpose();
  out.offset = joint.mean.tail(action_dim) - out.gain * joint.mean.head(state_dim);
  out.covariance = symmetrize(s_aa - out.gain * s_ss * out.gain.transpose());
  return out;
}

ConditionalGaussian gaussian_condition_fixed_gain(const JointMoments& joint,
                                                  Eigen::Index state_dim,
                                                  const Matrix& gain) {
  const Eigen::Index dim = joint.dim();
  const Eigen::Index action_dim = dim - state_dim;
  if (state_dim < 0 || state_dim > dim || gain.rows() != action_dim || gain.cols() != state_dim) {
    throw std::invalid_argument("gaussian_condition_fixed_gain: inconsistent dimensions");
  }
  const Matrix s_ss = joint.covariance.topLeftCorner(state_dim, state_dim);
  const Matrix s_aa = joint.covariance.bottomRightCorner(action_dim, action_dim);
  ConditionalGaussian out;
  out.gain = gain;
  out.offset = joint.mean.tail(action_dim) - gain * joint.mean.head(state_dim);
  out.covariance = symmetrize(s_aa - gain * s_ss * gain.transpose());
  return out;
}

GaussianFactor::GaussianFactor(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols()) {
    throw std::invalid_argument("GaussianFactor: covariance must be square");
  }
  if (!covariance.allFinite()) throw std::domain_error("not positive definite");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw std::domain_error("not positive definite");
  lower_ = llt.matrixL();
  log_det_ = 0.0;
  for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
    const double d = lower_(i, i);
    if (!(d > 0.0)) throw std::domain_error("not positive definite");
    log_det_ += 2.0 * std::log(d);
  }
}

Vector GaussianFactor::colour(RngStream& rng) const {
  return lower_.triangularView<Eigen::Lower>() * rng.standard_normal(lower_.rows());
}

double GaussianFactor::log_density(const Vector& residual) const {
  if (residual.size() != lower_.rows()) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  const Vector whitened = lower_.triangularView<Eigen::Lower>().solve(residual);
  return -0.5 * whitened.squaredNorm() -
         0.5 * (static_cast<double>(residual.size()) * kLog2Pi + log_det_);
}

Vector sample_gaussian(RngStream& rng, const GaussianParams& params) {
  const GaussianFactor factor(params.covariance);
  if (params.mean.size() != factor.dim()) {
    throw std::invalid_argument("sample_gaussian: dimension mismatch");
  }
  return params.mean + factor.colour(rng);
}

double log_density_gaussian(const Vector& x, const GaussianParams& params) {
  return GaussianFactor(params.covariance).log_density(x - params.mean);
}

double log_sum_exp(const Vector& values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isfinite(v) && v > peak) peak = v;
  }
  if (!std::isfinite(peak)) return -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) total += std::exp(v - peak);
  }
  return peak + std::log(total);
}

Vector normalize_logweights(const Vector& log_weights) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) {
    if (v == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("normalize_logweights: +inf log-weight");
    }
    if (std::isfinite(v) && v > peak) peak = v;
  }
  if (!std::isfinite(peak)) throw std::domain_error("no viable samples");

  Vector w(log_weights.size());
  double total = 0.0;
  for (Eigen::Index j = 0; j < log_weights.size(); ++j) {
    const double v = log_weights[j];
    w[j] = std::isfinite(v) ? std::exp(v - peak) : 0.0;
    total += w[j];
  }
  return w / total;
}

Matrix poly_projection_matrix(Eigen::Index length, int degree) {
  if (degree < 0) throw std::invalid_argument("poly_project: degree must be nonnegative");
  if (static_cast<Eigen::Index>(degree) >= length) {
    throw std::invalid_argument("poly_project: degree " + std::to_string(degree) +
                                " needs more than " + std::to_string(length) + " samples");
  }
  const Eigen::Index basis = degree + 1;
  Matrix vandermonde(length, basis);
  for (Eigen::Index n = 0; n < length; ++n) {
    const double t = length > 1 ? static_cast<double>(n) / static_cast<double>(length - 1) : 0.0;
    double power = 1.0;
    for (Eigen::Index p = 0; p < basis; ++p) {
      vandermonde(n, p) = power;
      power *= t;
    }
  }
  Eigen::HouseholderQR<Matrix> qr(vandermonde);
  const Matrix q = qr.householderQ() * Matrix::Identity(length, basis);
  return q * q.transpose();
}

std::vector<Matrix> poly_project(std::span<const Matrix> signal, int degree) {
  const auto length = static_cast<Eigen::Index>(signal.size());
  if (length == 0) throw std::invalid_argument("poly_project: empty signal");
  const Matrix projector = poly_projection_matrix(length, degree);
  const Eigen::Index rows = signal.front().rows();
  const Eigen::Index cols = signal.front().cols();
  for (const Matrix& m : signal) {
    if (m.rows() != rows || m.cols() != cols) {
      throw std::invalid_argument("poly_project: inconsistent entry shapes");
    }
  }
  std::vector<Matrix> out(signal.size(), Matrix::Zero(rows, cols));
  for (Eigen::Index n = 0; n < length; ++n) {
    for (Eigen::Index m = 0; m < length; ++m) {
      out[static_cast<std::size_t>(n)] += projector(n, m) * signal[static_cast<std::size_t>(m)];
    }
  }
  return out;
}

std::vector<Vector> poly_project(std::span<const Vector> signal, int degree) {
  std::vector<Matrix> as_matrices(signal.begin(), signal.end());
  std::vector<Matrix> projected = poly_project(std::span<const Matrix>(as_matrices), degree);
  return {projected.begin(), projected.end()};
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

PsdRepairResult psd_repair(const Matrix& sigma, const PsdRepairOptions& options) {
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("psd_repair: matrix not square");
  if (!sigma.allFinite()) throw std::domain_error("psd_repair: non-finite matrix");
  const Matrix sym = symmetrize(sigma);
  const double lowest = min_eigenvalue(sym);
  if (lowest >= options.floor) return {sym, 0.0};

  const Matrix identity = Matrix::Identity(sym.rows(), sym.cols());
  double shift = options.initial_shift;
  while (lowest + shift < options.floor) shift *= options.growth;
  // The shifted spectrum is checked once more to absorb rounding in lowest + shift.
  Matrix repaired = sym + shift * identity;
  while (min_eigenvalue(repaired) < options.floor) {
    shift *= options.growth;
    repaired = sym + shift * identity;
  }
  return {repaired, shift};
}

}  // namespace trajopt
