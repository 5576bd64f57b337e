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

// Entropic stochastic search over a static objective with a Gaussian belief.

#include <cstdint>

#include "trajopt/linalg.hpp"
#include "trajopt/oracle_envs.hpp"
#include "trajopt/record.hpp"
#include "trajopt/rng.hpp"

namespace trajopt {

struct SearchState {
  Vector mean;
  Matrix covariance;
};

struct SearchConfig {
  double lambda = 1.0;
  double alpha = 0.95;
  int samples = 100;
  int iterations = 150;
  std::uint64_t seed = 0;
  PsdRepairOptions repair;

  void validate() const;
};

struct SearchStep {
  SearchState state;
  Vector objective_values;  // q(x_j)
  Vector weights;           // normalised
};

/// Draws x_j ~ N(mu, Sigma), weights them with
///   w_j = exp(-(lambda q(x_j) + (1 - alpha) log N(x_j | mu, Sigma)))
/// and returns the weighted mean and the weighted covariance about the new
/// mean. The covariance is repaired so that the next draw stays possible.
SearchStep stochastic_search_step(const SearchState& state, const Objective& objective,
                                  double lambda, double alpha, int samples, RngStream& rng,
                                  const PsdRepairOptions& repair = {});

}  // namespace trajopt
