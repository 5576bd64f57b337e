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

#include "trajopt/policy.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trajopt/io.hpp"

namespace trajopt {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw std::invalid_argument("policy: matrix has wrong row count");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument("policy: matrix has wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

LinearGaussianPolicy::LinearGaussianPolicy(std::vector<PolicyStep> steps)
    : steps_(std::move(steps)) {
  if (steps_.empty()) throw std::invalid_argument("policy: horizon must be positive");
  const Eigen::Index na = steps_.front().feedforward.size();
  const Eigen::Index ns = steps_.front().gain.cols();
  factors_.reserve(steps_.size());
  for (std::size_t n = 0; n < steps_.size(); ++n) {
    const PolicyStep& s = steps_[n];
    if (s.feedforward.size() != na || s.gain.rows() != na || s.gain.cols() != ns ||
        s.covariance.rows() != na || s.covariance.cols() != na) {
      throw std::invalid_argument("policy: step " + std::to_string(n) + " has mismatched shapes");
    }
    if (!s.feedforward.allFinite() || !s.gain.allFinite()) {
      throw std::invalid_argument("policy: step " + std::to_string(n) + " has non-finite entries");
    }
    if ((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
      throw std::invalid_argument("policy: covariance at step " + std::to_string(n) +
                                  " is not symmetric");
    }
    factors_.emplace_back(s.covariance);
  }
}

LinearGaussianPolicy LinearGaussianPolicy::constant(int horizon, int state_dim, int action_dim,
                                                    double feedforward, double variance) {
  std::vector<PolicyStep> steps(static_cast<std::size_t>(horizon),
                                PolicyStep{Vector::Constant(action_dim, feedforward),
                                           Matrix::Zero(action_dim, state_dim),
                                           variance * Matrix::Identity(action_dim, action_dim)});
  return LinearGaussianPolicy(std::move(steps));
}

const PolicyStep& LinearGaussianPolicy::step(int n) const {
  if (n < 0 || n >= horizon()) {
    throw std::out_of_range("policy: step " + std::to_string(n) + " outside horizon " +
                            std::to_string(horizon()));
  }
  return steps_[static_cast<std::size_t>(n)];
}

Vector LinearGaussianPolicy::mean_action(int n, const Vector& state) const {
  const PolicyStep& s = step(n);
  if (state.size() != s.gain.cols()) throw std::invalid_argument("policy: state dimension mismatch");
  return s.feedforward + s.gain * state;
}

Vector LinearGaussianPolicy::sample(int n, const Vector& state, RngStream& rng) const {
  const Vector mean = mean_action(n, state);
  return mean + factors_[static_cast<std::size_t>(n)].colour(rng);
}

double LinearGaussianPolicy::log_prob(int n, const Vector& state, const Vector& action) const {
  const Vector mean = mean_action(n, state);
  return factors_[static_cast<std::size_t>(n)].log_density(action - mean);
}

Vector LinearGaussianPolicy::entropy_series() const {
  Vector out(horizon());
  for (int n = 0; n < horizon(); ++n) out[n] = factors_[static_cast<std::size_t>(n)].log_det();
  return out;
}

LinearGaussianPolicy policy_smooth(const LinearGaussianPolicy& updated,
                                   const LinearGaussianPolicy& previous, double beta,
                                   const PsdRepairOptions& repair) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("policy_smooth: beta must lie in (0, 1]");
  if (updated.horizon() != previous.horizon() || updated.state_dim() != previous.state_dim() ||
      updated.action_dim() != previous.action_dim()) {
    throw std::invalid_argument("policy_smooth: shape mismatch");
  }
  std::vector<PolicyStep> steps;
  steps.reserve(static_cast<std::size_t>(updated.horizon()));
  for (int n = 0; n < updated.horizon(); ++n) {
    const PolicyStep& a = updated.step(n);
    const PolicyStep& b = previous.step(n);
    PolicyStep s;
    s.feedforward = beta * a.feedforward + (1.0 - beta) * b.feedforward;
    s.gain = beta * a.gain + (1.0 - beta) * b.gain;
    s.covariance = psd_repair(beta * a.covariance + (1.0 - beta) * b.covariance, repair).matrix;
    steps.push_back(std::move(s));
  }
  return LinearGaussianPolicy(std::move(steps));
}

std::string policy_to_json(const LinearGaussianPolicy& policy) {
  nlohmann::json doc;
  doc["horizon"] = policy.horizon();
  doc["state_dim"] = policy.state_dim();
  doc["action_dim"] = policy.action_dim();
  nlohmann::json steps = nlohmann::json::array();
  for (const PolicyStep& s : policy.steps()) {
    nlohmann::json step;
    step["k"] = std::vector<double>(s.feedforward.data(), s.feedforward.data() + s.feedforward.size());
    step["K"] = matrix_to_json(s.gain);
    step["Sigma"] = matrix_to_json(s.covariance);
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  return doc.dump(2) + "\n";
}

LinearGaussianPolicy policy_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  const auto horizon = doc.at("horizon").get<Eigen::Index>();
  const auto ns = doc.at("state_dim").get<Eigen::Index>();
  const auto na = doc.at("action_dim").get<Eigen::Index>();
  const auto& steps_json = doc.at("steps");
  if (static_cast<Eigen::Index>(steps_json.size()) != horizon) {
    throw std::invalid_argument("policy: step count does not match horizon");
  }
  std::vector<PolicyStep> steps;
  for (const auto& sj : steps_json) {
    const auto k = sj.at("k").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(k.size()) != na) throw std::invalid_argument("policy: k has wrong size");
    PolicyStep s;
    s.feedforward = Eigen::Map<const Vector>(k.data(), na);
    s.gain = matrix_from_json(sj.at("K"), na, ns);
    s.covariance = matrix_from_json(sj.at("Sigma"), na, na);
    steps.push_back(std::move(s));
  }
  return LinearGaussianPolicy(std::move(steps));
}

void save_policy(const LinearGaussianPolicy& policy, const std::filesystem::path& path) {
  write_file_atomic(path, policy_to_json(policy));
}

LinearGaussianPolicy load_policy(const std::filesystem::path& path) {
  return policy_from_json(read_file(path));
}

}  // namespace trajopt
