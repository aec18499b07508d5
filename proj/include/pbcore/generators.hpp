// Copyright 2026 The Authors.
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

// Random instance families for experiments and benchmarks. Both generators
// are fully deterministic functions of their parameter structs (including the
// seed): the same inputs produce byte-identical serialized instances on every
// platform, because all randomness flows through the counter-based Rng and
// the result is materialized via the canonical JSON loader.

#ifndef PBCORE_GENERATORS_HPP_
#define PBCORE_GENERATORS_HPP_

#include <cstdint>

#include "pbcore/model.hpp"

namespace pbcore {

enum class WeightDist { kUniform, kExponential };

// Returns "uniform" or "exponential"; the inverse is parse_weight_dist.
const char* weight_dist_name(WeightDist dist);
WeightDist parse_weight_dist(const std::string& name);

struct RandomAdditiveParams {
  int n = 6;
  int m = 10;
  double budget = 5.0;
  WeightDist dist = WeightDist::kUniform;
  // Candidate sizes are drawn uniformly from [size_min, size_max]; the
  // defaults give unit sizes. size_max may not exceed the budget, so every
  // candidate is individually affordable.
  double size_min = 1.0;
  double size_max = 1.0;
  std::uint64_t seed = 0;
};

// n voters with strictly positive additive weights over m candidates.
Instance random_additive(const RandomAdditiveParams& params);

struct RandomCoverageParams {
  int n = 6;
  int m = 10;
  // Number of ground elements shared by all voters.
  int universe = 12;
  // Each candidate covers each element independently with this probability.
  double density = 0.3;
  double budget = 5.0;
  std::uint64_t seed = 0;
};

// n weighted-coverage voters over m unit-size candidates. The cover sets are
// common to all voters; element weights are per voter and strictly positive,
// so every voter values at least one candidate whenever any cover set is
// non-empty (which the generator guarantees).
Instance random_coverage(const RandomCoverageParams& params);

}  // namespace pbcore

#endif  // PBCORE_GENERATORS_HPP_
