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

// Multilinear extension of voter utilities: F_i(x) = E[u_i(T)] where each
// candidate j enters T independently with probability x_j. Three evaluation
// paths: a closed form for additive utilities, exhaustive enumeration for
// small candidate sets, and Monte-Carlo sampling with common random numbers
// shared across voters and coordinates.

#ifndef PBCORE_MULTILINEAR_HPP_
#define PBCORE_MULTILINEAR_HPP_

#include <cstdint>
#include <vector>

#include "pbcore/common.hpp"
#include "pbcore/model.hpp"

namespace pbcore {

// A fractional committee over all candidates. Small candidates are pinned at
// 1; large candidates range in [floor_j, 1].
struct FractionalAllocation {
  std::vector<double> x;
  std::vector<double> floors;
  // Cached sum of s_j * x_j over large candidates; the local search maintains
  // it incrementally and tests compare it against recompute_large_cost.
  double large_cost = 0.0;

  double recompute_large_cost(const Instance& inst, const CandidatePartition& part) const;
};

enum class EstimatorMode {
  kAuto,     // additive -> closed form; m <= exact_max_m -> enumerate; else sample
  kExact,    // force closed form / enumeration (error if m too large)
  kSampled,  // force Monte-Carlo sampling
};

struct EstimatorConfig {
  EstimatorMode mode = EstimatorMode::kAuto;
  int exact_max_m = 12;
  // Target additive estimation error and per-estimate failure probability;
  // with samples == 0 the sample count is derived from these two.
  double delta = 1e-3;
  double fail_prob = 0.01;
  long long samples = 0;
  std::uint64_t seed = 0;
};

// ceil(m^2 * ln(2/fail_prob) / delta^2): Hoeffding sample count for utilities
// in [0, m]. Throws if the result is astronomically large (> 2^62).
long long derived_samples(const EstimatorConfig& cfg, int m);

// Draws T ~ x into mask (resized to x.size()).
void sample_committee(const std::vector<double>& x, Rng& rng, Mask* mask);

// Exhaustive 2^m evaluation. Errors when m > 25.
double multilinear_value_exact(const UtilityOracle& oracle, const std::vector<double>& x);
double multilinear_grad_exact(const UtilityOracle& oracle, const std::vector<double>& x, int j);

// One-off estimates honoring cfg (value: closed form / enumeration / sample
// mean; grad: the same via E[u(T + j) - u(T - j)]).
double multilinear_value(const Instance& inst, int voter, const std::vector<double>& x,
                         const EstimatorConfig& cfg);
double multilinear_grad(const Instance& inst, int voter, const std::vector<double>& x, int j,
                        const EstimatorConfig& cfg);

// Batch estimator for the local search: evaluates values and all requested
// coordinate gradients for a fixed voter set. Exact-enumeration tables are
// built once per construction; sampled calls share one committee stream
// across voters and coordinates (common random numbers) and draw it from
// (cfg.seed, call counter), so results are independent of call order.
class MultilinearEstimator {
 public:
  MultilinearEstimator(const Instance& inst, std::vector<int> voters, EstimatorConfig cfg);

  // values: per voter (same order as the constructor's voter list).
  // grads: per voter, dense over all m coordinates; only entries listed in
  // grad_coords are filled (nullptr = all coordinates).
  void estimate(const std::vector<double>& x, std::uint64_t call_counter,
                const std::vector<int>* grad_coords, std::vector<double>* values,
                std::vector<std::vector<double>>* grads) const;

  // True when every voter is evaluated without sampling noise.
  bool deterministic() const { return sampled_voters_.empty(); }
  long long samples_per_call() const { return samples_; }
  const std::vector<int>& voters() const { return voters_; }

 private:
  const Instance* inst_;
  std::vector<int> voters_;
  EstimatorConfig cfg_;
  long long samples_ = 0;
  // Per-voter evaluation route resolved at construction.
  enum class Route { kClosedForm, kEnumerate, kSample };
  std::vector<Route> routes_;
  std::vector<int> sampled_voters_;              // positions within voters_
  std::vector<std::vector<double>> enum_tables_; // per voter: 2^m normalized values
};

}  // namespace pbcore

#endif  // PBCORE_MULTILINEAR_HPP_
