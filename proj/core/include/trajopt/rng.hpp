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

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace trajopt {

/// Value-typed random stream.
///
/// A stream is identified by a 64-bit key. Child streams are derived with
/// substream(index), which hashes the parent key with the index, so a batch
/// can hand every (sample, step) pair its own generator and get results that
/// do not depend on which thread ran which sample.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream substream(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

  double normal();
  double uniform();
  Eigen::VectorXd standard_normal(Eigen::Index dim);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finaliser, used to derive stream keys.
std::uint64_t mix_seed(std::uint64_t value);

}  // namespace trajopt
