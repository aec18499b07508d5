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

#include "pbcore/nw_search.hpp"

#include <algorithm>
#include <cmath>

namespace pbcore {

namespace {

// Floor for log/division arguments; voter values are clamped here, never
// reported below it.
constexpr double kValueFloor = 1e-300;

double safe_log(double v) { return std::log(std::max(v, kValueFloor)); }

}  // namespace

const char* profile_name(Profile profile) {
  return profile == Profile::kProof ? "proof" : "practical";
}

double proof_swap_delta(double eps, double budget_total, int m) {
  return std::pow(eps, 7) * budget_total / (312.0 * std::pow(static_cast<double>(m), 6));
}

double proof_estimator_delta(double eps, int n, int m) {
  return std::pow(eps, 6) / (64.0 * n * std::pow(static_cast<double>(m), 5));
}

std::vector<double> default_floors(const Instance& inst, const CandidatePartition& part,
                                   double B) {
  std::vector<double> floors(inst.num_candidates(), 0.0);
  for (int j : part.small) floors[j] = 1.0;
  if (part.large_cost > 0.0) {
    const double large_floor = B * inst.epsilon / part.large_cost;
    for (int j : part.large) floors[j] = large_floor;
  }
  return floors;
}

std::vector<double> initial_allocation(const Instance& inst, const CandidatePartition& part,
                                       double B, const std::vector<double>& floors) {
  std::vector<double> x(inst.num_candidates(), 1.0);
  double floor_cost = 0.0, headroom = 0.0;
  for (int j : part.large) {
    floor_cost += inst.size_of(j) * floors[j];
    headroom += inst.size_of(j) * (1.0 - floors[j]);
  }
  if (floor_cost > B + 1e-12)
    throw Error("allocation floors alone exceed the round budget");
  const double t = headroom > 0.0 ? std::min(1.0, (B - floor_cost) / headroom) : 0.0;
  for (int j : part.large) x[j] = floors[j] + t * (1.0 - floors[j]);
  return x;
}

PhiGradients nw_gradient_bundle(const Instance& inst, const MultilinearEstimator& estimator,
                                const std::vector<double>& x, const std::vector<int>& large,
                                std::uint64_t call_counter) {
  PhiGradients out;
  std::vector<std::vector<double>> grads;
  estimator.estimate(x, call_counter, &large, &out.voter_values, &grads);
  out.per_size.assign(inst.num_candidates(), 0.0);
  for (std::size_t v = 0; v < out.voter_values.size(); ++v) {
    const double value = std::max(out.voter_values[v], kValueFloor);
    out.phi += safe_log(out.voter_values[v]);
    for (int j : large) out.per_size[j] += grads[v][j] / value;
  }
  for (int j : large) out.per_size[j] /= inst.size_of(j);
  return out;
}

NwResult nw_local_search(const Instance& inst, const std::vector<int>& W, double B,
                         const NwParams& params) {
  if (W.empty()) throw Error("local search needs a non-empty voter set");
  const int m = inst.num_candidates();
  const double b = inst.budget;
  const double eps = inst.epsilon;
  if (B < eps * b / (5.0 * m) - 1e-12 || B > b + 1e-12)
    throw Error("round budget outside [eps*b/(5m), b]");
  CandidatePartition part = partition_candidates(inst);
  if (part.large.empty()) throw Error("no large candidates to search over");
  if (part.large_cost <= B)
    throw Error("large candidates fit the round budget; no search needed");

  // Resolve profile defaults.
  double delta = params.delta;
  if (delta <= 0.0)
    delta = params.profile == Profile::kProof ? proof_swap_delta(eps, b, m)
                                              : B / (100.0 * m);
  double tau = params.tau;
  if (tau <= 0.0) tau = 3.0 * eps / (4.0 * b);
  EstimatorConfig est_cfg = params.estimator;
  if (params.profile == Profile::kProof && est_cfg.samples == 0)
    est_cfg.delta = proof_estimator_delta(eps, static_cast<int>(W.size()), m);

  std::vector<double> floors = params.custom_floors;
  if (floors.empty()) {
    floors = default_floors(inst, part, B);
  } else {
    if (static_cast<int>(floors.size()) != m)
      throw Error("custom floors must cover every candidate");
    double floor_cost = 0.0;
    for (int j : part.large) {
      if (floors[j] < 0.0 || floors[j] > 1.0) throw Error("custom floors must lie in [0, 1]");
      floor_cost += inst.size_of(j) * floors[j];
    }
    if (floor_cost > B + 1e-12)
      throw Error("custom floors cost more than the round budget; rejected");
    for (int j : part.small) floors[j] = 1.0;
  }

  NwResult result;
  result.budget = B;
  result.alloc.floors = floors;
  result.alloc.x = initial_allocation(inst, part, B, floors);

  MultilinearEstimator estimator(inst, W, est_cfg);
  std::vector<double>& x = result.alloc.x;

  int prev_up = -1, prev_down = -1;
  for (long long iter = 0; iter < params.max_iters; ++iter) {
    PhiGradients bundle = nw_gradient_bundle(inst, estimator, x, part.large, iter);
    if (params.record_trace) result.phi_trace.push_back(bundle.phi);
    result.iters = iter + 1;
    result.alloc.large_cost = result.alloc.recompute_large_cost(inst, part);
    result.max_budget_drift =
        std::max(result.max_budget_drift, std::abs(result.alloc.large_cost - B));

    // Steepest admissible pair; ascending index scan with strict comparisons
    // breaks ties toward the lowest candidate index.
    int up = -1, down = -1;
    for (int j : part.large) {
      const double step = delta / inst.size_of(j);
      if (x[j] <= 1.0 - step + 1e-12 && (up < 0 || bundle.per_size[j] > bundle.per_size[up]))
        up = j;
      if (x[j] >= floors[j] + step - 1e-12 &&
          (down < 0 || bundle.per_size[j] < bundle.per_size[down]))
        down = j;
    }
    if (up < 0 || down < 0 || up == down ||
        !(bundle.per_size[up] > bundle.per_size[down] + tau)) {
      result.converged = true;
      break;
    }
    // A fixed step can overshoot near the optimum and ping-pong one parcel
    // between the same two coordinates. Halving the step on a detected
    // reversal restores progress; a smaller step only enlarges the admissible
    // pair set, so the eventual convergence certificate is unweakened.
    if (up == prev_down && down == prev_up) delta = std::max(delta / 2.0, 1e-9 * B / m);
    prev_up = up;
    prev_down = down;
    x[up] = std::min(1.0, x[up] + delta / inst.size_of(up));
    x[down] = std::max(floors[down], x[down] - delta / inst.size_of(down));
  }
  result.alloc.large_cost = result.alloc.recompute_large_cost(inst, part);
  result.max_budget_drift =
      std::max(result.max_budget_drift, std::abs(result.alloc.large_cost - B));
  return result;
}

CoalitionBoundReport check_coalition_bound(const Instance& inst, const std::vector<int>& W,
                             const NwResult& result, const std::vector<double>& y,
                             double theta, const EstimatorConfig& cfg) {
  const double eps = inst.epsilon;
  if (theta <= 1.0 + 2.0 * eps) throw Error("theta must exceed 1 + 2*eps");
  double cost_y = 0.0;
  for (int j = 0; j < inst.num_candidates(); ++j) cost_y += inst.size_of(j) * y[j];
  if (cost_y > inst.budget + 1e-9) throw Error("probe allocation costs more than the budget");

  CoalitionBoundReport report;
  for (int i : W) {
    const double at_x = multilinear_value(inst, i, result.alloc.x, cfg);
    const double at_y = multilinear_value(inst, i, y, cfg);
    if (at_y > theta * at_x) ++report.coalition;
  }
  report.bound = static_cast<double>(W.size()) * cost_y /
                 (result.budget * (1.0 - eps) * (theta - 1.0 - 2.0 * eps));
  report.pass = report.coalition < report.bound;
  return report;
}

}  // namespace pbcore
