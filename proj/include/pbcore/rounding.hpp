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

// Rounding fractional allocations into committees: independent rounding with
// a size cutoff for the submodular pipeline, budget-preserving dependent
// (pipage) rounding for the additive one, and the gamma-satisfaction test
// that decides which voters a realized committee serves.

#ifndef PBCORE_ROUNDING_HPP_
#define PBCORE_ROUNDING_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "pbcore/common.hpp"
#include "pbcore/model.hpp"
#include "pbcore/multilinear.hpp"

namespace pbcore {

struct Committee {
  std::vector<int> members;  // ascending candidate indices
  // Dependent rounding can leave one coordinate fractional; it is reported
  // here and may serve as an additament witness, but is never part of
  // members.
  std::optional<std::pair<int, double>> fractional_leftover;

  double cost(const Instance& inst) const { return inst.cost_of(members); }
  bool contains(int j) const;
};

// Failure probability bounds that size the acceptance threshold.
double beta_submodular(double kappa, double gamma);  // (k e^{1-k})^{1/k} + (g-1) e^{2-g}
double beta_additive(double gamma);                  // g e^{1-g}

// Independent rounding: all small candidates, plus each large candidate with
// size <= kappa * B independently with probability min(1, x_j). Large
// candidates above the cutoff are never included.
Committee round_submodular(const Instance& inst, const CandidatePartition& part,
                           const std::vector<double>& x, double B, double kappa, Rng& rng);

// Dependent rounding: repeatedly pairs the two lowest-indexed fractional
// large coordinates and shifts cost between them; only the direction is
// random, chosen so that E[X_j] = min(1, x_j) and the large-block cost never
// grows. At most one fractional coordinate survives. Small candidates are
// always included.
Committee round_dependent(const Instance& inst, const CandidatePartition& part,
                          const std::vector<double>& x, Rng& rng);

// Did committee O (plus one additament from all of C) reach a gamma-fraction
// of the fractional value?
struct SatisfactionRecord {
  int voter = -1;       // instance voter index
  bool satisfied = false;
  int additament = -1;  // best q, always reported
  double ratio = 0.0;   // u_i(O + q*) / U_i(x)
  double value_at_x = 0.0;
};

std::vector<SatisfactionRecord> gamma_satisfaction(const Instance& inst,
                                                   const std::vector<int>& W,
                                                   const std::vector<double>& voter_values_at_x,
                                                   const Committee& committee, double gamma);

// Convenience overload that estimates U_i(x) per cfg.
std::vector<SatisfactionRecord> gamma_satisfaction(const Instance& inst,
                                                   const std::vector<int>& W,
                                                   const std::vector<double>& x,
                                                   const Committee& committee, double gamma,
                                                   const EstimatorConfig& cfg);

// Acceptance test for one realization: the large members fit in B and at
// least ceil((1 - beta - eps) |W|) voters are gamma-satisfied.
bool accept_realization(const Instance& inst, const CandidatePartition& part,
                        const std::vector<SatisfactionRecord>& records, const Committee& committee,
                        double B, double beta, double eps);

int satisfaction_threshold(int num_voters, double beta, double eps);

}  // namespace pbcore

#endif  // PBCORE_ROUNDING_HPP_
