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

#include "pbcore/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbcore {

namespace {

constexpr double kIntegralTol = 1e-12;

bool is_one(double v) { return v >= 1.0 - kIntegralTol; }
bool is_zero(double v) { return v <= kIntegralTol; }

}  // namespace

bool Committee::contains(int j) const {
  return std::binary_search(members.begin(), members.end(), j);
}

double beta_submodular(double kappa, double gamma) {
  return std::pow(kappa * std::exp(1.0 - kappa), 1.0 / kappa) +
         (gamma - 1.0) * std::exp(2.0 - gamma);
}

double beta_additive(double gamma) { return gamma * std::exp(1.0 - gamma); }

Committee round_submodular(const Instance& inst, const CandidatePartition& part,
                           const std::vector<double>& x, double B, double kappa, Rng& rng) {
  Committee committee;
  committee.members = part.small;
  const double cutoff = kappa * B;
  for (int j : part.large) {
    if (inst.size_of(j) > cutoff) continue;  // handled by the additament case
    if (rng.bernoulli(std::min(1.0, x[j]))) committee.members.push_back(j);
  }
  std::sort(committee.members.begin(), committee.members.end());
  return committee;
}

Committee round_dependent(const Instance& inst, const CandidatePartition& part,
                          const std::vector<double>& x, Rng& rng) {
  Committee committee;
  committee.members = part.small;

  std::vector<int> fractional;
  for (int j : part.large) {
    const double v = std::min(1.0, x[j]);
    if (is_one(v))
      committee.members.push_back(j);
    else if (!is_zero(v))
      fractional.push_back(j);
  }
  std::vector<double> y(x);

  // Pair the two lowest-indexed fractional coordinates; every step makes at
  // least one of them integral while preserving the block's total cost, so
  // this ends after at most m - 1 steps with at most one survivor.
  while (fractional.size() >= 2) {
    const int j = fractional[0], k = fractional[1];
    const double sj = inst.size_of(j), sk = inst.size_of(k);
    // Direction 1 raises y_j and lowers y_k by the same cost parcel d1;
    // direction 2 does the opposite with d2.
    const double d1 = std::min((1.0 - y[j]) * sj, y[k] * sk);
    const double d2 = std::min(y[j] * sj, (1.0 - y[k]) * sk);
    if (rng.next_double() * (d1 + d2) < d2) {
      y[j] += d1 / sj;
      y[k] -= d1 / sk;
    } else {
      y[j] -= d2 / sj;
      y[k] += d2 / sk;
    }
    for (int idx : {1, 0}) {  // resolve k first so erasing keeps positions valid
      const int c = fractional[idx];
      if (is_one(y[c])) {
        committee.members.push_back(c);
        fractional.erase(fractional.begin() + idx);
      } else if (is_zero(y[c])) {
        fractional.erase(fractional.begin() + idx);
      }
    }
  }
  if (!fractional.empty())
    committee.fractional_leftover = {fractional[0], y[fractional[0]]};
  std::sort(committee.members.begin(), committee.members.end());
  return committee;
}

std::vector<SatisfactionRecord> gamma_satisfaction(const Instance& inst,
                                                   const std::vector<int>& W,
                                                   const std::vector<double>& voter_values_at_x,
                                                   const Committee& committee, double gamma) {
  if (!(gamma >= 1.0)) throw Error("gamma must be at least 1");
  const int m = inst.num_candidates();
  Mask mask = mask_from_members(m, committee.members);
  std::vector<SatisfactionRecord> records;
  records.reserve(W.size());
  for (std::size_t w = 0; w < W.size(); ++w) {
    const UtilityOracle& oracle = inst.voters[W[w]].oracle;
    SatisfactionRecord rec;
    rec.voter = W[w];
    rec.value_at_x = voter_values_at_x[w];
    // Best single additament over all of C (q already in O degenerates to
    // u(O) by idempotence of set insertion).
    double best = -1.0;
    for (int q = 0; q < m; ++q) {
      const std::uint8_t saved = mask[q];
      mask[q] = 1;
      const double v = oracle.value(mask);
      mask[q] = saved;
      if (v > best) {
        best = v;
        rec.additament = q;
      }
    }
    rec.ratio = rec.value_at_x > 0.0 ? best / rec.value_at_x
                                     : std::numeric_limits<double>::infinity();
    rec.satisfied = best * gamma >= rec.value_at_x;
    records.push_back(rec);
  }
  return records;
}

std::vector<SatisfactionRecord> gamma_satisfaction(const Instance& inst,
                                                   const std::vector<int>& W,
                                                   const std::vector<double>& x,
                                                   const Committee& committee, double gamma,
                                                   const EstimatorConfig& cfg) {
  std::vector<double> values(W.size());
  for (std::size_t w = 0; w < W.size(); ++w)
    values[w] = multilinear_value(inst, W[w], x, cfg);
  return gamma_satisfaction(inst, W, values, committee, gamma);
}

int satisfaction_threshold(int num_voters, double beta, double eps) {
  return static_cast<int>(std::ceil((1.0 - beta - eps) * num_voters));
}

bool accept_realization(const Instance& inst, const CandidatePartition& part,
                        const std::vector<SatisfactionRecord>& records, const Committee& committee,
                        double B, double beta, double eps) {
  double large_cost = 0.0;
  Mask small = mask_from_members(inst.num_candidates(), part.small);
  for (int j : committee.members)
    if (!small[j]) large_cost += inst.size_of(j);
  if (large_cost > B + 1e-9) return false;
  int satisfied = 0;
  for (const SatisfactionRecord& rec : records) satisfied += rec.satisfied ? 1 : 0;
  return satisfied >= satisfaction_threshold(static_cast<int>(records.size()), beta, eps);
}

}  // namespace pbcore
