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

// Nash-Welfare local search: maximizes sum_i log U_i(x) over fractional
// allocations with a fixed budget on the large candidates, by repeatedly
// shifting a small cost parcel delta from the flattest coordinate to the
// steepest one (per unit of size) until no pair clears the swap threshold.

#ifndef PBCORE_NW_SEARCH_HPP_
#define PBCORE_NW_SEARCH_HPP_

#include <cstdint>
#include <vector>

#include "pbcore/common.hpp"
#include "pbcore/model.hpp"
#include "pbcore/multilinear.hpp"

namespace pbcore {

enum class Profile { kProof, kPractical };

const char* profile_name(Profile profile);

// Step size and estimator accuracy prescribed by the analysis; far below
// what finishes in practice, hence the separate practical profile.
double proof_swap_delta(double eps, double budget_total, int m);
double proof_estimator_delta(double eps, int n, int m);

struct NwParams {
  Profile profile = Profile::kPractical;
  // Swap parcel in cost units; 0 = profile default (practical: B/(100 m),
  // proof: the prescribed formula).
  double delta = 0.0;
  // Per-size gradient gap needed to accept a swap; 0 = 3*eps/(4b).
  double tau = 0.0;
  long long max_iters = 100000;
  EstimatorConfig estimator;
  // Optional custom lower bounds per candidate (dense over m). Empty =
  // standard floors: 1 on small candidates, B*eps/S_large on large ones.
  // Rejected if the floors alone overshoot the budget.
  std::vector<double> custom_floors;
  bool record_trace = true;
};

struct NwResult {
  FractionalAllocation alloc;
  // phi after 0, 1, 2, ... accepted swaps (empty when trace recording is off).
  std::vector<double> phi_trace;
  long long iters = 0;
  bool converged = false;
  double budget = 0.0;
  // Largest |sum_large s_j x_j - B| observed across iterations.
  double max_budget_drift = 0.0;
};

// Standard floors for budget B: 1 on small candidates, B*eps/S_large on the
// large ones (so the floors of the large block cost exactly eps*B).
std::vector<double> default_floors(const Instance& inst, const CandidatePartition& part,
                                   double B);

// Deterministic start: interpolates every large coordinate uniformly between
// its floor and 1 so the large block costs exactly B.
std::vector<double> initial_allocation(const Instance& inst, const CandidatePartition& part,
                                       double B, const std::vector<double>& floors);

// Per-voter utility estimates plus the per-size gradient of
// phi(x) = sum_i log U_i(x) on the large coordinates, from one shared
// estimator call (common random numbers across voters and coordinates).
struct PhiGradients {
  std::vector<double> voter_values;
  std::vector<double> per_size;  // dense over m; filled on large coordinates
  double phi = 0.0;
};

PhiGradients nw_gradient_bundle(const Instance& inst, const MultilinearEstimator& estimator,
                                const std::vector<double>& x, const std::vector<int>& large,
                                std::uint64_t call_counter);

// Runs the local search for voter set W at budget B over the large
// candidates. Preconditions: W non-empty, B in [eps*b/(5m), b], and the large
// candidates cost more than B in total (otherwise there is nothing to
// search).
NwResult nw_local_search(const Instance& inst, const std::vector<int>& W, double B,
                         const NwParams& params);

// Blocking-coalition bound at a local optimum: counts S = {i : U_i(y) >
// theta * U_i(x)} and checks |S| < |W| * Cost(y) / (B (1-eps) (theta-1-2eps)).
struct CoalitionBoundReport {
  int coalition = 0;
  double bound = 0.0;
  bool pass = false;
};

CoalitionBoundReport check_coalition_bound(const Instance& inst, const std::vector<int>& W,
                             const NwResult& result, const std::vector<double>& y,
                             double theta, const EstimatorConfig& cfg);

}  // namespace pbcore

#endif  // PBCORE_NW_SEARCH_HPP_
