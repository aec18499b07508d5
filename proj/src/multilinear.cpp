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

#include "pbcore/multilinear.hpp"

#include <algorithm>
#include <cmath>

namespace pbcore {

namespace {

constexpr int kHardEnumerationCap = 25;
constexpr std::uint64_t kValueSalt = 0x564c55;   // one-off value streams
constexpr std::uint64_t kGradSalt = 0x475244;    // one-off gradient streams
constexpr std::uint64_t kBundleSalt = 0xb31d;    // estimator call streams

double closed_form_additive(const UtilityOracle& oracle, const std::vector<double>& x) {
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    total += oracle.additive_weights()[j] * std::min(1.0, x[j]);
  return total / oracle.scale_divisor();
}

// Probability that exactly the candidates in mask are drawn.
double mask_probability(const Mask& mask, const std::vector<double>& x) {
  double p = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) p *= mask[j] ? x[j] : 1.0 - x[j];
  return p;
}

void next_mask(Mask* mask, std::uint32_t bits) {
  for (std::size_t j = 0; j < mask->size(); ++j) (*mask)[j] = (bits >> j) & 1u;
}

}  // namespace

double FractionalAllocation::recompute_large_cost(const Instance& inst,
                                                  const CandidatePartition& part) const {
  double total = 0.0;
  for (int j : part.large) total += inst.size_of(j) * x[j];
  return total;
}

long long derived_samples(const EstimatorConfig& cfg, int m) {
  if (cfg.samples < 0) throw Error("estimator sample count must be non-negative");
  if (cfg.samples > 0) return cfg.samples;
  if (!(cfg.delta > 0.0)) throw Error("estimator delta must be positive");
  if (!(cfg.fail_prob > 0.0) || !(cfg.fail_prob < 1.0))
    throw Error("estimator failure probability must lie in (0, 1)");
  const long double h = std::ceil(static_cast<long double>(m) * m *
                                  std::log(2.0L / cfg.fail_prob) / (static_cast<long double>(cfg.delta) * cfg.delta));
  if (h > 4.0e18L)
    throw Error("derived sample count overflows practical limits; set samples explicitly");
  return std::max(1LL, static_cast<long long>(h));
}

void sample_committee(const std::vector<double>& x, Rng& rng, Mask* mask) {
  mask->resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) (*mask)[j] = rng.bernoulli(x[j]) ? 1 : 0;
}

double multilinear_value_exact(const UtilityOracle& oracle, const std::vector<double>& x) {
  const int m = static_cast<int>(x.size());
  if (m > kHardEnumerationCap)
    throw Error("exact multilinear evaluation needs 2^" + std::to_string(m) +
                " terms; refusing beyond 2^" + std::to_string(kHardEnumerationCap));
  double total = 0.0;
  Mask mask(m, 0);
  for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
    next_mask(&mask, bits);
    const double p = mask_probability(mask, x);
    if (p > 0.0) total += p * oracle.value(mask);
  }
  return total;
}

double multilinear_grad_exact(const UtilityOracle& oracle, const std::vector<double>& x, int j) {
  std::vector<double> hi = x, lo = x;
  hi[j] = 1.0;
  lo[j] = 0.0;
  return multilinear_value_exact(oracle, hi) - multilinear_value_exact(oracle, lo);
}

namespace {

double sampled_mean_value(const UtilityOracle& oracle, const std::vector<double>& x,
                          long long samples, Rng rng) {
  Mask mask;
  double total = 0.0;
  for (long long h = 0; h < samples; ++h) {
    sample_committee(x, rng, &mask);
    total += oracle.value(mask);
  }
  return total / static_cast<double>(samples);
}

}  // namespace

double multilinear_value(const Instance& inst, int voter, const std::vector<double>& x,
                         const EstimatorConfig& cfg) {
  const UtilityOracle& oracle = inst.voters[voter].oracle;
  const int m = static_cast<int>(x.size());
  if (oracle.kind() == OracleKind::kAdditive && cfg.mode != EstimatorMode::kSampled)
    return closed_form_additive(oracle, x);
  if (cfg.mode == EstimatorMode::kExact ||
      (cfg.mode == EstimatorMode::kAuto && m <= cfg.exact_max_m))
    return multilinear_value_exact(oracle, x);

  const long long samples = derived_samples(cfg, m);
  double mean = sampled_mean_value(oracle, x, samples,
                                   Rng::derive(cfg.seed, {kValueSalt, static_cast<std::uint64_t>(voter), 0}));
  // Very small estimates get one fresh pass, then a floor at delta, so that
  // downstream logarithms stay finite.
  if (mean <= cfg.delta) {
    mean = sampled_mean_value(oracle, x, samples,
                              Rng::derive(cfg.seed, {kValueSalt, static_cast<std::uint64_t>(voter), 1}));
    mean = std::max(mean, cfg.delta);
  }
  return mean;
}

double multilinear_grad(const Instance& inst, int voter, const std::vector<double>& x, int j,
                        const EstimatorConfig& cfg) {
  const UtilityOracle& oracle = inst.voters[voter].oracle;
  const int m = static_cast<int>(x.size());
  if (oracle.kind() == OracleKind::kAdditive && cfg.mode != EstimatorMode::kSampled)
    return oracle.additive_weights()[j] / oracle.scale_divisor();
  if (cfg.mode == EstimatorMode::kExact ||
      (cfg.mode == EstimatorMode::kAuto && m <= cfg.exact_max_m))
    return multilinear_grad_exact(oracle, x, j);

  const long long samples = derived_samples(cfg, m);
  Rng rng = Rng::derive(cfg.seed, {kGradSalt, static_cast<std::uint64_t>(voter),
                                   static_cast<std::uint64_t>(j)});
  Mask mask;
  double total = 0.0;
  for (long long h = 0; h < samples; ++h) {
    sample_committee(x, rng, &mask);
    const std::uint8_t saved = mask[j];
    mask[j] = 1;
    const double up = oracle.value(mask);
    mask[j] = 0;
    const double down = oracle.value(mask);
    mask[j] = saved;
    total += up - down;
  }
  return total / static_cast<double>(samples);
}

MultilinearEstimator::MultilinearEstimator(const Instance& inst, std::vector<int> voters,
                                           EstimatorConfig cfg)
    : inst_(&inst), voters_(std::move(voters)), cfg_(cfg) {
  const int m = inst.num_candidates();
  routes_.reserve(voters_.size());
  enum_tables_.resize(voters_.size());
  for (std::size_t v = 0; v < voters_.size(); ++v) {
    const UtilityOracle& oracle = inst.voters[voters_[v]].oracle;
    Route route;
    if (oracle.kind() == OracleKind::kAdditive && cfg_.mode != EstimatorMode::kSampled) {
      route = Route::kClosedForm;
    } else if (cfg_.mode == EstimatorMode::kExact ||
               (cfg_.mode == EstimatorMode::kAuto && m <= cfg_.exact_max_m)) {
      if (m > 20)
        throw Error("exact estimator tables refused for m = " + std::to_string(m) +
                    " (> 20); use sampling");
      route = Route::kEnumerate;
      auto& table = enum_tables_[v];
      table.resize(std::size_t{1} << m);
      Mask mask(m, 0);
      for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
        next_mask(&mask, bits);
        table[bits] = oracle.value(mask);
      }
    } else {
      route = Route::kSample;
      sampled_voters_.push_back(static_cast<int>(v));
    }
    routes_.push_back(route);
  }
  if (!sampled_voters_.empty()) samples_ = derived_samples(cfg_, m);
}

void MultilinearEstimator::estimate(const std::vector<double>& x, std::uint64_t call_counter,
                                    const std::vector<int>* grad_coords,
                                    std::vector<double>* values,
                                    std::vector<std::vector<double>>* grads) const {
  const int m = inst_->num_candidates();
  std::vector<int> all_coords;
  if (grad_coords == nullptr) {
    all_coords.resize(m);
    for (int j = 0; j < m; ++j) all_coords[j] = j;
    grad_coords = &all_coords;
  }
  values->assign(voters_.size(), 0.0);
  grads->assign(voters_.size(), std::vector<double>(m, 0.0));

  for (std::size_t v = 0; v < voters_.size(); ++v) {
    const UtilityOracle& oracle = inst_->voters[voters_[v]].oracle;
    switch (routes_[v]) {
      case Route::kClosedForm: {
        (*values)[v] = closed_form_additive(oracle, x);
        for (int j : *grad_coords)
          (*grads)[v][j] = oracle.additive_weights()[j] / oracle.scale_divisor();
        break;
      }
      case Route::kEnumerate: {
        // One sweep accumulates the value and every coordinate gradient via
        // E[u(T + j) - u(T - j)] with table lookups.
        const auto& table = enum_tables_[v];
        Mask mask(m, 0);
        double value = 0.0;
        for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
          next_mask(&mask, bits);
          const double p = mask_probability(mask, x);
          if (p <= 0.0) continue;
          value += p * table[bits];
          for (int j : *grad_coords)
            (*grads)[v][j] += p * (table[bits | (1u << j)] - table[bits & ~(1u << j)]);
        }
        (*values)[v] = value;
        break;
      }
      case Route::kSample:
        break;  // handled jointly below
    }
  }

  if (sampled_voters_.empty()) return;

  // Common random numbers: every sampled voter and every coordinate sees the
  // same committee stream, derived from (seed, call counter).
  Rng rng = Rng::derive(cfg_.seed, {kBundleSalt, call_counter});
  Mask mask;
  for (long long h = 0; h < samples_; ++h) {
    sample_committee(x, rng, &mask);
    for (int v : sampled_voters_) {
      const UtilityOracle& oracle = inst_->voters[voters_[v]].oracle;
      (*values)[v] += oracle.value(mask);
      for (int j : *grad_coords) {
        const std::uint8_t saved = mask[j];
        mask[j] = 1;
        const double up = oracle.value(mask);
        mask[j] = 0;
        const double down = oracle.value(mask);
        mask[j] = saved;
        (*grads)[v][j] += up - down;
      }
    }
  }
  for (int v : sampled_voters_) {
    (*values)[v] /= static_cast<double>(samples_);
    for (int j : *grad_coords) (*grads)[v][j] /= static_cast<double>(samples_);
  }

  // Resample guard for near-zero values (finite logarithms downstream).
  std::vector<int> tiny;
  for (int v : sampled_voters_)
    if ((*values)[v] <= cfg_.delta) tiny.push_back(v);
  if (tiny.empty()) return;
  Rng rng2 = Rng::derive(cfg_.seed, {kBundleSalt, call_counter, 1});
  std::vector<double> redo(tiny.size(), 0.0);
  for (long long h = 0; h < samples_; ++h) {
    sample_committee(x, rng2, &mask);
    for (std::size_t t = 0; t < tiny.size(); ++t)
      redo[t] += inst_->voters[voters_[tiny[t]]].oracle.value(mask);
  }
  for (std::size_t t = 0; t < tiny.size(); ++t)
    (*values)[tiny[t]] = std::max(redo[t] / static_cast<double>(samples_), cfg_.delta);
}

}  // namespace pbcore
