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

#include "pbcore/iter_round.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbcore/multilinear.hpp"

namespace pbcore {

using ordered_json = nlohmann::ordered_json;

namespace {

// Stream salts so the round/attempt randomness, the estimator streams and any
// future consumer of the driver seed never collide.
constexpr std::uint64_t kEstimatorSalt = 0x17e5;
constexpr std::uint64_t kAttemptSalt = 0xa77e;

constexpr double kCostTol = 1e-9;

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

// Best single-candidate additament on top of the final committee; the
// fallback certificate for voters the loop never retired.
VoterOutcome residual_outcome(const Instance& inst, int voter, const Mask& committee_mask) {
  const int m = inst.num_candidates();
  Mask mask = committee_mask;
  VoterOutcome out;
  out.voter = voter;
  out.round = -1;
  double best = -1.0;
  for (int q = 0; q < m; ++q) {
    const std::uint8_t saved = mask[q];
    mask[q] = 1;
    const double value = inst.voters[voter].oracle.value(mask);
    mask[q] = saved;
    if (value > best) {
      best = value;
      out.additament = q;
    }
  }
  out.ratio = best;
  return out;
}

struct GuaranteeInfo {
  double alpha = 0.0;
  std::string label;
};

GuaranteeInfo guarantee_for(const DriverParams& params, bool additive) {
  GuaranteeInfo info;
  if (additive) {
    const double formula = alpha_formula_additive(params.omega, params.gamma);
    if (near(params.omega, 0.15) && near(params.gamma, 6.7)) {
      info.alpha = 9.27;
      info.label = "paper, Lindahl-based";
    } else {
      info.alpha = formula;
      info.label = "formula, Lindahl-based";
    }
  } else {
    const double formula = alpha_formula(params.omega, params.gamma, params.kappa, 0.0);
    if (near(params.omega, 0.23) && near(params.gamma, 7.435) && near(params.kappa, 0.21)) {
      info.alpha = 67.37;
      info.label = "paper";
    } else {
      info.alpha = formula;
      info.label = "formula";
    }
  }
  return info;
}

SolveReport run_driver(const Instance& input, const DriverParams& params_in, bool additive) {
  DriverParams params = params_in;
  Instance override_storage;
  const Instance* inst = &input;
  if (params.eps == 0.0) {
    params.eps = input.epsilon;
  } else if (params.eps != input.epsilon) {
    if (!(params.eps > 0.0 && params.eps < 0.05))
      throw Error("driver eps must lie in (0, 1/20)");
    override_storage = input;
    override_storage.epsilon = params.eps;
    inst = &override_storage;
  }
  if (!(params.omega > 0.0 && params.omega < 1.0)) throw Error("omega must lie in (0, 1)");
  if (!(params.gamma >= 1.0)) throw Error("gamma must be at least 1");
  if (!(params.kappa > 0.0 && params.kappa <= 1.0)) throw Error("kappa must lie in (0, 1]");
  const double eps = params.eps;
  double beta = 0.0;
  if (additive) {
    for (const Voter& voter : inst->voters)
      if (voter.oracle.kind() != OracleKind::kAdditive)
        throw Error("the additive driver requires every voter to be additive; voter '" +
                    voter.id + "' is " + oracle_kind_name(voter.oracle.kind()));
    beta = beta_additive(params.gamma);
    alpha_formula_additive(params.omega, params.gamma);  // parameter-region check
  } else {
    // The loop guard b_t >= (eps/m) b keeps the round's program budget
    // kappa*b_t legal for the local search only when kappa >= 1/5.
    if (params.kappa < 0.2 - 1e-12)
      throw Error("the submodular driver requires kappa >= 1/5 so every round budget stays "
                  "above the local-search minimum");
    beta = beta_submodular(params.kappa, params.gamma);
    alpha_formula(params.omega, params.gamma, params.kappa, eps);  // parameter-region check
  }

  const GuaranteeInfo guarantee = guarantee_for(params, additive);
  const double b = inst->budget;
  const int m = inst->num_candidates();
  if (m == 0) throw Error("cannot solve an instance with no candidates");

  SolveReport report;
  report.method = additive ? "additive" : "submodular";
  report.params = params;
  report.alpha_guarantee = guarantee.alpha;
  report.guarantee_label = guarantee.label;

  std::vector<int> active(static_cast<std::size_t>(inst->num_voters()));
  for (int i = 0; i < inst->num_voters(); ++i) active[static_cast<std::size_t>(i)] = i;

  // Everything fits: select all of C, done. (This also covers C_s = C, where
  // the small bucket alone costs at most eps*b.)
  if (inst->total_size() <= b + kCostTol) {
    report.committee.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) report.committee[static_cast<std::size_t>(j)] = j;
    report.total_cost = inst->total_size();
    const Mask full(static_cast<std::size_t>(m), 1);
    for (int i : active) report.voters.push_back(residual_outcome(*inst, i, full));
    return report;
  }

  const CandidatePartition part = partition_candidates(*inst);
  Mask in_committee(static_cast<std::size_t>(m), 0);
  for (int j : part.small) in_committee[static_cast<std::size_t>(j)] = 1;

  const int max_attempts = static_cast<int>(std::ceil(40.0 / eps));
  const double guard = eps * b / m;
  double b_t = (1.0 - eps) * (1.0 - params.omega) * b;

  NwParams nw;
  nw.profile = params.profile;
  nw.max_iters = params.nw_max_iters;
  nw.record_trace = false;

  for (int t = 0; b_t >= guard * (1.0 - 1e-12) && !active.empty(); ++t, b_t *= params.omega) {
    const double B = params.kappa * b_t;
    nw.estimator.seed =
        Rng::derive(params.seed, {kEstimatorSalt, static_cast<std::uint64_t>(t)}).next_u64();
    const NwResult nw_result = nw_local_search(*inst, active, B, nw);
    if (!nw_result.converged)
      throw NonConvergenceError("round " + std::to_string(t) + ": local search hit " +
                                    std::to_string(nw.max_iters) + " iterations without converging",
                                t);
    std::vector<double> values(active.size());
    for (std::size_t k = 0; k < active.size(); ++k)
      values[k] = multilinear_value(*inst, active[k], nw_result.alloc.x, nw.estimator);

    RoundTrace trace;
    trace.t = t;
    trace.budget = b_t;
    trace.active_voters = static_cast<int>(active.size());
    trace.nw_iters = nw_result.iters;

    bool accepted = false;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      Rng rng = Rng::derive(params.seed, {kAttemptSalt, static_cast<std::uint64_t>(t),
                                          static_cast<std::uint64_t>(attempt)});
      const Committee realized =
          additive ? round_dependent(*inst, part, nw_result.alloc.x, rng)
                   : round_submodular(*inst, part, nw_result.alloc.x, b_t, params.kappa, rng);
      const std::vector<SatisfactionRecord> records =
          gamma_satisfaction(*inst, active, values, realized, params.gamma);
      if (!accept_realization(*inst, part, records, realized, b_t, beta, eps)) continue;

      trace.attempts = attempt + 1;
      trace.committee = realized.members;
      trace.leftover = realized.fractional_leftover;
      std::vector<int> survivors;
      for (const SatisfactionRecord& rec : records) {
        if (rec.satisfied) {
          trace.removed.push_back(rec.voter);
          report.voters.push_back({rec.voter, t, rec.additament, rec.ratio});
        } else {
          survivors.push_back(rec.voter);
        }
      }
      active = std::move(survivors);
      for (int j : realized.members) in_committee[static_cast<std::size_t>(j)] = 1;
      accepted = true;
      break;
    }
    if (!accepted)
      throw RoundingCapError("round " + std::to_string(t) + ": no rounding attempt out of " +
                                 std::to_string(max_attempts) + " was accepted",
                             t);
    report.rounds.push_back(std::move(trace));
  }

  for (int i : active) report.voters.push_back(residual_outcome(*inst, i, in_committee));
  std::sort(report.voters.begin(), report.voters.end(),
            [](const VoterOutcome& a, const VoterOutcome& b_out) { return a.voter < b_out.voter; });

  report.committee = members_from_mask(in_committee);
  report.total_cost = inst->cost_of(report.committee);
  // The telescoping budget argument promises this unconditionally.
  if (report.total_cost > b + kCostTol)
    throw Error("internal error: committee cost " + std::to_string(report.total_cost) +
                " exceeds the budget " + std::to_string(b));
  return report;
}

}  // namespace

DriverParams submodular_preset(std::uint64_t seed) {
  DriverParams params;
  params.omega = 0.23;
  params.gamma = 7.435;
  params.kappa = 0.21;
  params.seed = seed;
  return params;
}

DriverParams additive_preset(std::uint64_t seed) {
  DriverParams params;
  params.omega = 0.15;
  params.gamma = 6.7;
  params.kappa = 1.0;
  params.seed = seed;
  return params;
}

double alpha_formula(double omega, double gamma, double kappa, double eps) {
  if (!(omega > 0.0 && omega < 1.0)) throw Error("omega must lie in (0, 1)");
  if (!(gamma >= 1.0)) throw Error("gamma must be at least 1");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw Error("kappa must lie in (0, 1]");
  if (!(eps >= 0.0 && eps < 1.0)) throw Error("eps must lie in [0, 1)");
  const double beta = beta_submodular(kappa, gamma);
  if (omega <= beta + eps)
    throw Error("invalid parameter region: omega = " + std::to_string(omega) +
                " does not exceed beta + eps = " + std::to_string(beta + eps));
  return omega * gamma /
             (kappa * (1.0 - omega) * (omega - beta - eps) * (1.0 - eps) * (1.0 - eps)) +
         (1.0 + 2.0 * eps) * gamma;
}

double alpha_formula_additive(double omega, double gamma) {
  if (!(omega > 0.0 && omega < 1.0)) throw Error("omega must lie in (0, 1)");
  if (!(gamma >= 1.0)) throw Error("gamma must be at least 1");
  const double beta = beta_additive(gamma);
  if (omega <= beta)
    throw Error("invalid parameter region: omega = " + std::to_string(omega) +
                " does not exceed gamma e^{1-gamma} = " + std::to_string(beta));
  return omega * gamma / ((1.0 - omega) * (omega - beta));
}

SolveReport solve_submodular(const Instance& inst, const DriverParams& params) {
  return run_driver(inst, params, /*additive=*/false);
}

SolveReport solve_additive(const Instance& inst, const DriverParams& params) {
  return run_driver(inst, params, /*additive=*/true);
}

std::string serialize_report(const Instance& inst, const SolveReport& report,
                             const std::string& timestamp) {
  ordered_json doc;
  doc["method"] = report.method;
  doc["profile"] = profile_name(report.params.profile);
  doc["seed"] = report.params.seed;
  if (!timestamp.empty()) doc["timestamp"] = timestamp;
  doc["parameters"] = {{"omega", report.params.omega},
                       {"gamma", report.params.gamma},
                       {"kappa", report.params.kappa},
                       {"eps", report.params.eps},
                       {"nw_max_iters", report.params.nw_max_iters}};
  doc["alpha_guarantee"] = report.alpha_guarantee;
  doc["guarantee_label"] = report.guarantee_label;
  ordered_json committee = ordered_json::array();
  for (int j : report.committee) committee.push_back(inst.candidates[j].id);
  doc["committee"] = std::move(committee);
  doc["total_cost"] = report.total_cost;

  ordered_json rounds = ordered_json::array();
  for (const RoundTrace& trace : report.rounds) {
    ordered_json entry;
    entry["t"] = trace.t;
    entry["budget"] = trace.budget;
    entry["active_voters"] = trace.active_voters;
    entry["attempts"] = trace.attempts;
    entry["nw_iters"] = trace.nw_iters;
    ordered_json members = ordered_json::array();
    for (int j : trace.committee) members.push_back(inst.candidates[j].id);
    entry["committee"] = std::move(members);
    ordered_json removed = ordered_json::array();
    for (int i : trace.removed) removed.push_back(inst.voters[i].id);
    entry["removed"] = std::move(removed);
    if (trace.leftover)
      entry["leftover"] = {{"candidate", inst.candidates[trace.leftover->first].id},
                           {"weight", trace.leftover->second}};
    else
      entry["leftover"] = nullptr;
    rounds.push_back(std::move(entry));
  }
  doc["rounds"] = std::move(rounds);

  ordered_json voters = ordered_json::array();
  for (const VoterOutcome& outcome : report.voters) {
    ordered_json entry;
    entry["id"] = inst.voters[outcome.voter].id;
    entry["round"] = outcome.round;
    if (outcome.additament >= 0)
      entry["additament"] = inst.candidates[outcome.additament].id;
    else
      entry["additament"] = nullptr;
    entry["ratio"] = outcome.ratio;
    voters.push_back(std::move(entry));
  }
  doc["voters"] = std::move(voters);
  return doc.dump(2) + "\n";
}

}  // namespace pbcore
