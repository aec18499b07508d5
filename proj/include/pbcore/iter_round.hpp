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

#ifndef PBCORE_ITER_ROUND_HPP_
#define PBCORE_ITER_ROUND_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pbcore/common.hpp"
#include "pbcore/model.hpp"
#include "pbcore/nw_search.hpp"
#include "pbcore/rounding.hpp"

namespace pbcore {

// Top-level driver parameters. The submodular preset is (omega, gamma, kappa)
// = (0.23, 7.435, 0.21) with independent rounding; the additive preset is
// (0.15, 6.7) with kappa = 1 and dependent rounding.
struct DriverParams {
  double omega = 0.23;
  double gamma = 7.435;
  double kappa = 0.21;
  // 0 = inherit the instance epsilon. Any other value replaces it everywhere
  // (small/large split included) and must lie in (0, 1/20).
  double eps = 0.0;
  Profile profile = Profile::kPractical;
  std::uint64_t seed = 0;
  long long nw_max_iters = 100000;
};

DriverParams submodular_preset(std::uint64_t seed = 0);
DriverParams additive_preset(std::uint64_t seed = 0);

// Raised when a round's local search hits its iteration cap (CLI exit 2).
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, int round) : Error(what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

// Raised when a round exhausts its rounding attempts (CLI exit 3).
class RoundingCapError : public Error {
 public:
  RoundingCapError(const std::string& what, int round) : Error(what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

struct RoundTrace {
  int t = 0;
  double budget = 0.0;  // b_t
  int active_voters = 0;
  std::vector<int> committee;  // accepted O_t (members only)
  std::vector<int> removed;    // voters satisfied and retired this round
  int attempts = 0;            // attempts consumed, accepted one included
  long long nw_iters = 0;
  // Dependent rounding can leave one fractional coordinate; it never joins
  // the committee but remains available as an additament.
  std::optional<std::pair<int, double>> leftover;
};

struct VoterOutcome {
  int voter = -1;
  // Round that satisfied the voter; -1 = retired after the loop (or by the
  // everything-fits shortcut), where the whole committee is the witness.
  int round = -1;
  int additament = -1;  // witness candidate q*
  // In-loop: u_i(O_t + q*) / U_i(x_t). Residual: u_i(T* + q*), measured
  // against the unit max-singleton normalization.
  double ratio = 0.0;
};

struct SolveReport {
  std::vector<int> committee;  // T*, ascending candidate indices
  double total_cost = 0.0;
  double alpha_guarantee = 0.0;
  std::string guarantee_label;
  std::string method;   // "submodular" | "additive"
  DriverParams params;  // effective values (eps resolved)
  std::vector<RoundTrace> rounds;
  std::vector<VoterOutcome> voters;  // one entry per voter, ascending
};

// alpha bound of the full pipeline:
//   omega*gamma / (kappa (1-omega) (omega - beta - eps) (1-eps)^2)
//     + (1 + 2 eps) * gamma,     beta = (k e^{1-k})^{1/k} + (g-1) e^{2-g}.
// Throws outside the valid region (omega <= beta + eps).
double alpha_formula(double omega, double gamma, double kappa, double eps);

// Additive closed form omega*gamma / ((1-omega) (omega - gamma e^{1-gamma})).
// Throws when the denominator is not positive.
double alpha_formula_additive(double omega, double gamma);

// Iterative rounding at geometrically shrinking budgets b_t =
// (1-eps)(1-omega) omega^t b. Each round solves the Nash-welfare program for
// the still-unsatisfied voters at budget kappa*b_t, rounds it, and retires
// every gamma-satisfied voter; leftovers are satisfied by an additament
// against the final committee. Total cost never exceeds b.
SolveReport solve_submodular(const Instance& inst, const DriverParams& params);

// Same loop with kappa = 1 semantics and dependent rounding; requires every
// voter to be additive.
SolveReport solve_additive(const Instance& inst, const DriverParams& params);

// Canonical JSON for a report. The timestamp is echoed verbatim when
// non-empty and omitted entirely when empty, so reruns with the same seed
// compare byte-identically.
std::string serialize_report(const Instance& inst, const SolveReport& report,
                             const std::string& timestamp = "");

}  // namespace pbcore

#endif  // PBCORE_ITER_ROUND_HPP_
