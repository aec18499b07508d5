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

#ifndef PBCORE_VERIFY_HPP_
#define PBCORE_VERIFY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbcore/model.hpp"

namespace pbcore {

// Which candidates may serve as the committee's additament q. The default
// follows the core definition (q ranges over all of C); the restrictive
// variant, kept for comparison with prior conventions, draws q from the
// deviating set T itself.
enum class AdditamentRule { kAllCandidates, kFromDeviation };

// Witness for "the committee is not in the alpha-core below alpha_witnessed":
// coalition S (of the minimum size its endowment requires) deviates to T, and
// every member multiplies their utility by at least alpha_witnessed no matter
// which additament the committee receives.
struct DeviationCertificate {
  std::vector<int> blocking_T;  // candidate indices, ascending
  std::vector<int> blocking_S;  // voter indices
  double alpha_witnessed = 0.0;
  double cost_T = 0.0;
  double endowment = 0.0;  // |S| * b / n
};

struct MinAlphaResult {
  // Smallest alpha for which no blocking coalition exists; the committee is
  // exactly min_alpha-core. +infinity when some deviation beats a voter whose
  // committee value is zero under every additament.
  double min_alpha = 0.0;
  std::optional<DeviationCertificate> certificate;  // present when > 1
};

// Exact verifier: enumerates every budget-feasible deviation T (subsets
// pruned by cost, candidates visited in ascending size order) and takes, per
// T, the k-th largest utility ratio where k = ceil(n * Cost(T) / b) is the
// smallest coalition whose endowment affords T. Requires m <= 24. jobs > 1
// shards the enumeration by smallest member; the max-reduction is
// order-independent, so results are identical for any jobs.
MinAlphaResult min_alpha(const Instance& inst, const std::vector<int>& committee,
                         AdditamentRule rule = AdditamentRule::kAllCandidates, int jobs = 1);

// Same result as min_alpha(full) on gadget instances (unit sizes, the
// favorite/second groups partitioning C), reached by enumerating per-gadget
// selection counts instead of raw subsets -- utilities only depend on those
// counts. Only the all-candidates additament rule is meaningful here (the
// restrictive rule depends on which representatives a profile picks).
MinAlphaResult min_alpha_profile(const Instance& inst, const std::vector<int>& committee);

// The two hard 6-voter, 6-gadget families with the cyclic favorite /
// second-favorite structure and budget 3 * gadget_size (half the candidates).
// param: the general family's alpha_lb (> 0 required); the submodular
// family's z, where 0 picks the extremal (sqrt(689) - 17) / 10.
enum class LowerBoundKind { kGeneral, kSubmodular };
Instance gen_lower_bound(LowerBoundKind kind, int gadget_size = 5, double param = 0.0);

// Randomized refutation search against the fractional relaxation: samples
// coalitions S and feasible fractional deviations z with Cost(z) <=
// (|S|/|W|) B and reports the first z that multiplies every member's utility
// by more than alpha. Sound (never fabricates a violation beyond the sampling
// margin) but not complete. Above the exact-enumeration size on non-additive
// oracles, utilities are sampled at a probe-grade accuracy whose Hoeffding
// count uses the voters' true utility range; delta, the sample count, and the
// resulting comparison margin are recorded below.
struct FractionalCoreReport {
  bool violation_found = false;
  int probe = -1;  // first violating probe
  std::vector<int> S;
  std::vector<double> z;
  double margin = 0.0;           // estimation slack added to the comparison
  double delta = 0.0;            // per-evaluation accuracy (0 = exact)
  long long samples_per_eval = 0;  // 0 on the exact route
  int probes_run = 0;
};

FractionalCoreReport check_fractional_core(const Instance& inst, const std::vector<double>& x,
                                           const std::vector<int>& W, double B, double alpha,
                                           int probes, std::uint64_t seed);

// JSON object for a certificate (ids instead of indices); +infinity is
// spelled "infinity" since JSON has no literal for it.
std::string serialize_certificate(const Instance& inst, const DeviationCertificate& cert);

}  // namespace pbcore

#endif  // PBCORE_VERIFY_HPP_
