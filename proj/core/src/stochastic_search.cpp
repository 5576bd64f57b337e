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

#include "trajopt/stochastic_search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace trajopt {

void SearchConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("search: lambda must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("search: alpha must lie in [0, 1]");
  if (samples < 2) throw std::invalid_argument("search: at least two samples required");
  if (iterations < 0) throw std::invalid_argument("search: iterations must be nonnegative");
}

SearchStep stochastic_search_step(const SearchState& state, const Objective& objective,
                                  double lambda, double alpha, int samples, RngStream& rng,
                                  const PsdRepairOptions& repair) {
  if (samples < 2) throw std::invalid_argument("search: at least two samples required");
  const GaussianFactor factor(state.covariance);
  const Eigen::Index dim = state.mean.size();

  Matrix draws(samples, dim);
  Vector values(samples);
  Vector log_weights(samples);
  for (int j = 0; j < samples; ++j) {
    const Vector noise = factor.colour(rng);
    draws.row(j) = (state.mean + noise).transpose();
    values[j] = objective(draws.row(j).transpose());
    const double lw = -(lambda * values[j] + (1.0 - alpha) * factor.log_density(noise));
    log_weights[j] = std::isfinite(lw) ? lw : -std::numeric_limits<double>::infinity();
  }
  Vector weights;
  try {
    weights = normalize_logweights(log_weights);
  } catch (const std::domain_error&) {
    throw std::domain_error("degenerate weights");
  }
  const JointMoments moments = weighted_moments(draws, weights);
  return {{moments.mean, psd_repair(moments.covariance, repair).matrix}, values, weights};
}

}  // namespace trajopt
