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

#include "pbcore/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <thread>
#include <utility>

#include "json.hpp"
#include "pbcore/multilinear.hpp"

namespace pbcore {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kProbeSalt = 0x9b0e;
constexpr std::uint64_t kFracValueSalt = 0xfc07;

// Per-voter max_q u_i(O + q) over all q in C: the committee's best defense.
std::vector<double> committee_denominators(const Instance& inst, const Mask& committee) {
  const int m = inst.num_candidates();
  std::vector<double> denom(static_cast<std::size_t>(inst.num_voters()), 0.0);
  Mask mask = committee;
  for (int i = 0; i < inst.num_voters(); ++i) {
    const UtilityOracle& oracle = inst.voters[static_cast<std::size_t>(i)].oracle;
    double best = 0.0;
    for (int q = 0; q < m; ++q) {
      const std::uint8_t saved = mask[static_cast<std::size_t>(q)];
      mask[static_cast<std::size_t>(q)] = 1;
      best = std::max(best, oracle.value(mask));
      mask[static_cast<std::size_t>(q)] = saved;
    }
    denom[static_cast<std::size_t>(i)] = best;
  }
  return denom;
}

// u_i(O + q) for every voter and candidate, flattened voter-major; feeds the
// restrictive additament rule, whose denominator depends on the deviation.
std::vector<double> additament_table(const Instance& inst, const Mask& committee) {
  const int m = inst.num_candidates();
  std::vector<double> table(static_cast<std::size_t>(inst.num_voters() * m), 0.0);
  Mask mask = committee;
  for (int i = 0; i < inst.num_voters(); ++i) {
    const UtilityOracle& oracle = inst.voters[static_cast<std::size_t>(i)].oracle;
    for (int q = 0; q < m; ++q) {
      const std::uint8_t saved = mask[static_cast<std::size_t>(q)];
      mask[static_cast<std::size_t>(q)] = 1;
      table[static_cast<std::size_t>(i * m + q)] = oracle.value(mask);
      mask[static_cast<std::size_t>(q)] = saved;
    }
  }
  return table;
}

double ratio_of(double value, double denom) {
  if (value <= 0.0) return 0.0;  // a voter gaining nothing never deviates
  if (denom <= 0.0) return kInf;
  return value / denom;
}

struct ShardResult {
  double best = 0.0;
  std::vector<int> best_T;
  std::vector<double> best_ratios;
};

// Depth-first walk over all feasible deviations whose smallest candidate (in
// ascending-size order) sits at a fixed shard position. Evaluation happens at
// every node; the running utilities come from incremental cursors.
class DeviationWalker {
 public:
  DeviationWalker(const Instance& inst, const std::vector<int>& order,
                  const std::vector<double>& denom, const std::vector<double>* strict_table)
      : inst_(inst), order_(order), denom_(denom), strict_table_(strict_table) {
    cursors_.reserve(static_cast<std::size_t>(inst.num_voters()));
    for (const Voter& voter : inst.voters) cursors_.emplace_back(voter.oracle, inst.num_candidates());
    ratios_.resize(static_cast<std::size_t>(inst.num_voters()));
    scratch_.resize(static_cast<std::size_t>(inst.num_voters()));
  }

  ShardResult run(int shard) {
    result_ = ShardResult();
    const int j = order_[static_cast<std::size_t>(shard)];
    if (inst_.size_of(j) <= inst_.budget + kCostTol) {
      enter(j);
      descend(shard + 1);
      leave(j);
    }
    return std::move(result_);
  }

 private:
  void enter(int j) {
    for (OracleCursor& cursor : cursors_) cursor.push(j);
    cost_ += inst_.size_of(j);
    members_.push_back(j);
  }

  void leave(int j) {
    members_.pop_back();
    cost_ -= inst_.size_of(j);
    for (OracleCursor& cursor : cursors_) cursor.pop(j);
  }

  void descend(int from) {
    evaluate();
    for (int p = from; p < static_cast<int>(order_.size()); ++p) {
      const int j = order_[static_cast<std::size_t>(p)];
      if (cost_ + inst_.size_of(j) > inst_.budget + kCostTol) break;  // ascending sizes
      enter(j);
      descend(p + 1);
      leave(j);
    }
  }

  void evaluate() {
    const int n = inst_.num_voters();
    const int k = std::max(
        1, static_cast<int>(std::ceil(n * cost_ / inst_.budget - kCostTol)));
    if (k > n) return;
    for (int i = 0; i < n; ++i) {
      double denom = denom_[static_cast<std::size_t>(i)];
      if (strict_table_ != nullptr) {
        denom = 0.0;
        const int m = inst_.num_candidates();
        for (int q : members_)
          denom = std::max(denom, (*strict_table_)[static_cast<std::size_t>(i * m + q)]);
      }
      ratios_[static_cast<std::size_t>(i)] =
          ratio_of(cursors_[static_cast<std::size_t>(i)].value(), denom);
    }
    scratch_ = ratios_;
    std::nth_element(scratch_.begin(), scratch_.begin() + (k - 1), scratch_.end(),
                     std::greater<double>());
    const double alpha = scratch_[static_cast<std::size_t>(k - 1)];
    if (alpha > result_.best) {
      result_.best = alpha;
      result_.best_T = members_;
      std::sort(result_.best_T.begin(), result_.best_T.end());
      result_.best_ratios = ratios_;
    }
  }

  const Instance& inst_;
  const std::vector<int>& order_;
  const std::vector<double>& denom_;
  const std::vector<double>* strict_table_;
  std::vector<OracleCursor> cursors_;
  std::vector<int> members_;
  std::vector<double> ratios_, scratch_;
  double cost_ = 0.0;
  ShardResult result_;
};

// Rebuilds the certificate for the winning deviation: coalition = the k
// voters with the largest ratios (ties to the lower index).
DeviationCertificate make_certificate(const Instance& inst, const std::vector<int>& T,
                                      const std::vector<double>& ratios, double alpha) {
  const int n = inst.num_voters();
  DeviationCertificate cert;
  cert.blocking_T = T;
  cert.alpha_witnessed = alpha;
  cert.cost_T = inst.cost_of(T);
  const int k =
      std::max(1, static_cast<int>(std::ceil(n * cert.cost_T / inst.budget - kCostTol)));
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&ratios](int a, int b) {
    return ratios[static_cast<std::size_t>(a)] > ratios[static_cast<std::size_t>(b)];
  });
  cert.blocking_S.assign(idx.begin(), idx.begin() + k);
  std::sort(cert.blocking_S.begin(), cert.blocking_S.end());
  cert.endowment = static_cast<double>(k) * inst.budget / n;
  return cert;
}

MinAlphaResult reduce_shards(const Instance& inst, const std::vector<ShardResult>& shards) {
  const ShardResult* best = nullptr;
  for (const ShardResult& shard : shards)
    if (shard.best_T.size() > 0 && (best == nullptr || shard.best > best->best)) best = &shard;
  MinAlphaResult result;
  if (best == nullptr) return result;  // only the empty deviation existed
  result.min_alpha = best->best;
  if (best->best > 1.0)
    result.certificate = make_certificate(inst, best->best_T, best->best_ratios, best->best);
  return result;
}

Mask committee_mask(const Instance& inst, const std::vector<int>& committee) {
  for (int j : committee)
    if (j < 0 || j >= inst.num_candidates())
      throw Error("committee mentions candidate index " + std::to_string(j) +
                  " outside the instance");
  return mask_from_members(inst.num_candidates(), committee);
}

}  // namespace

MinAlphaResult min_alpha(const Instance& inst, const std::vector<int>& committee,
                         AdditamentRule rule, int jobs) {
  const int m = inst.num_candidates();
  const int n = inst.num_voters();
  if (n == 0) throw Error("cannot verify an instance with no voters");
  if (m > 24) {
    char estimate[32];
    std::snprintf(estimate, sizeof(estimate), "%.3g", std::ldexp(1.0, std::min(m, 1023)));
    throw Error("full enumeration over m = " + std::to_string(m) +
                " candidates would visit up to 2^m = " + estimate +
                " deviations; 24 is the limit (use the profile mode for gadget instances)");
  }
  const Mask mask = committee_mask(inst, committee);
  const std::vector<double> denom = committee_denominators(inst, mask);
  std::vector<double> strict_table;
  if (rule == AdditamentRule::kFromDeviation) strict_table = additament_table(inst, mask);
  const std::vector<double>* strict = rule == AdditamentRule::kFromDeviation ? &strict_table : nullptr;

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&inst](int a, int b) { return inst.size_of(a) < inst.size_of(b); });

  std::vector<ShardResult> shards(static_cast<std::size_t>(m));
  const int workers = std::max(1, std::min(jobs, m));
  if (workers == 1) {
    DeviationWalker walker(inst, order, denom, strict);
    for (int s = 0; s < m; ++s) shards[static_cast<std::size_t>(s)] = walker.run(s);
  } else {
    std::atomic<int> next{0};
    auto consume = [&] {
      DeviationWalker walker(inst, order, denom, strict);
      for (int s = next.fetch_add(1); s < m; s = next.fetch_add(1))
        shards[static_cast<std::size_t>(s)] = walker.run(s);
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(consume);
    for (std::thread& thread : pool) thread.join();
  }
  return reduce_shards(inst, shards);
}

MinAlphaResult min_alpha_profile(const Instance& inst, const std::vector<int>& committee) {
  const int m = inst.num_candidates();
  const int n = inst.num_voters();
  if (n == 0) throw Error("cannot verify an instance with no voters");
  std::map<std::vector<int>, int> group_ids;
  std::vector<std::vector<int>> groups;
  auto intern = [&](std::vector<int> members) {
    std::sort(members.begin(), members.end());
    auto [it, inserted] = group_ids.emplace(members, static_cast<int>(groups.size()));
    if (inserted) groups.push_back(it->first);
    return it->second;
  };
  for (const Voter& voter : inst.voters) {
    const OracleKind kind = voter.oracle.kind();
    if (kind != OracleKind::kGadgetGeneral && kind != OracleKind::kGadgetSubmodular)
      throw Error("profile verification needs gadget voters; voter '" + voter.id + "' is " +
                  oracle_kind_name(kind));
    intern(voter.oracle.gadget_favorite());
    intern(voter.oracle.gadget_second());
  }
  for (int j = 0; j < m; ++j)
    if (inst.size_of(j) != 1.0)
      throw Error("profile verification needs unit candidate sizes; candidate '" +
                  inst.candidates[static_cast<std::size_t>(j)].id + "' has size " +
                  std::to_string(inst.size_of(j)));
  std::vector<int> owner(static_cast<std::size_t>(m), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int j : groups[g]) {
      if (owner[static_cast<std::size_t>(j)] != -1)
        throw Error("gadget groups overlap on candidate '" +
                    inst.candidates[static_cast<std::size_t>(j)].id + "'");
      owner[static_cast<std::size_t>(j)] = static_cast<int>(g);
    }
  }
  for (int j = 0; j < m; ++j)
    if (owner[static_cast<std::size_t>(j)] == -1)
      throw Error("candidate '" + inst.candidates[static_cast<std::size_t>(j)].id +
                  "' belongs to no gadget; the groups must partition the candidates");

  double profile_count = 1.0;
  for (const std::vector<int>& group : groups) profile_count *= static_cast<double>(group.size()) + 1.0;
  if (profile_count > 2e8) {
    char estimate[32];
    std::snprintf(estimate, sizeof(estimate), "%.3g", profile_count);
    throw Error("profile enumeration would visit " + std::string(estimate) +
                " count vectors; the limit is 2e8");
  }

  const Mask committee_bits = committee_mask(inst, committee);
  const std::vector<double> denom = committee_denominators(inst, committee_bits);

  const int G = static_cast<int>(groups.size());
  Mask deviation(static_cast<std::size_t>(m), 0);
  std::vector<double> ratios(static_cast<std::size_t>(n)), scratch(static_cast<std::size_t>(n));
  ShardResult best;
  double cost = 0.0;

  // Counts ascend within each gadget; members enter lowest index first, so
  // the representative committee for a count vector is deterministic.
  auto walk = [&](auto&& self, int g) -> void {
    if (g == G) {
      const int k = std::max(1, static_cast<int>(std::ceil(n * cost / inst.budget - kCostTol)));
      if (k > n) return;
      for (int i = 0; i < n; ++i)
        ratios[static_cast<std::size_t>(i)] = ratio_of(
            inst.voters[static_cast<std::size_t>(i)].oracle.value(deviation),
            denom[static_cast<std::size_t>(i)]);
      scratch = ratios;
      std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(),
                       std::greater<double>());
      const double alpha = scratch[static_cast<std::size_t>(k - 1)];
      if (alpha > best.best) {
        best.best = alpha;
        best.best_T = members_from_mask(deviation);
        best.best_ratios = ratios;
      }
      return;
    }
    const std::vector<int>& group = groups[static_cast<std::size_t>(g)];
    self(self, g + 1);  // count 0
    for (std::size_t c = 0; c < group.size(); ++c) {
      if (cost + 1.0 > inst.budget + kCostTol) break;
      deviation[static_cast<std::size_t>(group[c])] = 1;
      cost += 1.0;
      self(self, g + 1);
    }
    for (std::size_t c = group.size(); c-- > 0;) {
      if (deviation[static_cast<std::size_t>(group[c])] == 0) continue;
      deviation[static_cast<std::size_t>(group[c])] = 0;
      cost -= 1.0;
    }
  };
  walk(walk, 0);

  return reduce_shards(inst, {best});
}

Instance gen_lower_bound(LowerBoundKind kind, int gadget_size, double param) {
  if (gadget_size < 1) throw Error("gadget size must be at least 1");
  constexpr int kGadgets = 6;
  // Cyclic structure: voter i's favorite gadget is i, their second favorite
  // the next one within the two 3-cycles (1 2 3) and (4 5 6).
  constexpr int kFavorite[kGadgets] = {1, 2, 3, 4, 5, 6};
  constexpr int kSecond[kGadgets] = {2, 3, 1, 5, 6, 4};
  double z = param;
  if (kind == LowerBoundKind::kSubmodular) {
    if (z == 0.0) z = (std::sqrt(689.0) - 17.0) / 10.0;
    if (!(z > 0.0 && z <= 1.0)) throw Error("z must lie in (0, 1]");
  } else if (!(param > 0.0)) {
    throw Error("the general family needs a positive alpha_lb");
  }

  ordered_json doc;
  doc["budget"] = 3.0 * gadget_size;
  ordered_json candidates = ordered_json::array();
  for (int g = 1; g <= kGadgets; ++g)
    for (int c = 1; c <= gadget_size; ++c)
      candidates.push_back({{"id", "g" + std::to_string(g) + "c" + std::to_string(c)},
                            {"size", 1.0}});
  doc["candidates"] = std::move(candidates);
  auto gadget_ids = [gadget_size](int g) {
    ordered_json ids = ordered_json::array();
    for (int c = 1; c <= gadget_size; ++c)
      ids.push_back("g" + std::to_string(g) + "c" + std::to_string(c));
    return ids;
  };
  ordered_json voters = ordered_json::array();
  for (int i = 0; i < kGadgets; ++i) {
    ordered_json utility;
    if (kind == LowerBoundKind::kSubmodular) {
      utility["type"] = "gadget_submodular";
      utility["z"] = z;
    } else {
      utility["type"] = "gadget_general";
      utility["alpha_lb"] = param;
    }
    utility["favorite"] = gadget_ids(kFavorite[i]);
    utility["second"] = gadget_ids(kSecond[i]);
    voters.push_back({{"id", "v" + std::to_string(i + 1)}, {"utility", std::move(utility)}});
  }
  doc["voters"] = std::move(voters);
  return load_instance_from_json_text(doc.dump());
}

FractionalCoreReport check_fractional_core(const Instance& inst, const std::vector<double>& x,
                                           const std::vector<int>& W, double B, double alpha,
                                           int probes, std::uint64_t seed) {
  const int m = inst.num_candidates();
  if (probes < 1) throw Error("at least one probe is required");
  if (W.empty()) throw Error("the voter set W must be non-empty");
  if (static_cast<int>(x.size()) != m)
    throw Error("allocation length does not match the candidate count");

  EstimatorConfig cfg;
  cfg.seed = Rng::derive(seed, {kFracValueSalt}).next_u64();
  bool sampled = false;
  if (m > cfg.exact_max_m)
    for (int i : W)
      if (inst.voters[static_cast<std::size_t>(i)].oracle.kind() != OracleKind::kAdditive)
        sampled = true;

  if (sampled) {
    // Probing is a refuter, so proof-grade accuracy buys nothing here; the
    // default delta would derive billions of samples per evaluation. Use a
    // coarse delta and size the Hoeffding count from the voters' true utility
    // range (u is monotone, so u(full set) bounds every sample) instead of
    // the worst-case range the generic derivation assumes.
    cfg.delta = 0.05;
    Mask full(static_cast<std::size_t>(m), 1);
    double range = 0.0;
    for (int i : W)
      range = std::max(range, inst.voters[static_cast<std::size_t>(i)].oracle.value(full));
    range = std::max(range, 1e-9);
    const long double h = std::ceil(static_cast<long double>(range) * range *
                                    std::log(2.0L / cfg.fail_prob) /
                                    (static_cast<long double>(cfg.delta) * cfg.delta));
    cfg.samples = std::max(1LL, static_cast<long long>(h));
  }

  FractionalCoreReport report;
  // Both sides of U_i(z) > alpha * U_i(x) carry up to delta of sampling
  // error, so a sound refutation needs (1 + alpha) * delta of headroom, and
  // never less than the 2 * delta a unit alpha would.
  report.margin = sampled ? std::max(2.0, 1.0 + alpha) * cfg.delta : 0.0;
  report.delta = sampled ? cfg.delta : 0.0;
  report.samples_per_eval = sampled ? cfg.samples : 0;

  std::vector<double> base(W.size());
  for (std::size_t i = 0; i < W.size(); ++i)
    base[i] = multilinear_value(inst, W[i], x, cfg);

  std::vector<double> z(static_cast<std::size_t>(m));
  std::vector<int> S;
  for (int probe = 0; probe < probes; ++probe) {
    Rng rng = Rng::derive(seed, {kProbeSalt, static_cast<std::uint64_t>(probe)});
    S.clear();
    for (int i : W)
      if (rng.bernoulli(0.5)) S.push_back(i);
    if (S.empty()) S.push_back(W[rng.next_below(static_cast<std::uint32_t>(W.size()))]);
    const double endowment = static_cast<double>(S.size()) / W.size() * B;
    double cost = 0.0;
    for (int j = 0; j < m; ++j) {
      z[static_cast<std::size_t>(j)] = rng.next_double();
      cost += inst.size_of(j) * z[static_cast<std::size_t>(j)];
    }
    if (cost <= 0.0) continue;
    const double scale = endowment / cost;
    for (double& zj : z) zj = std::min(1.0, zj * scale);

    bool all_beat = true;
    for (int i : S) {
      const double at_z = multilinear_value(inst, i, z, cfg);
      const auto pos = std::find(W.begin(), W.end(), i) - W.begin();
      if (!(at_z > alpha * base[static_cast<std::size_t>(pos)] + report.margin)) {
        all_beat = false;
        break;
      }
    }
    report.probes_run = probe + 1;
    if (all_beat) {
      report.violation_found = true;
      report.probe = probe;
      report.S = S;
      report.z = z;
      break;
    }
  }
  return report;
}

std::string serialize_certificate(const Instance& inst, const DeviationCertificate& cert) {
  ordered_json doc;
  if (std::isfinite(cert.alpha_witnessed))
    doc["alpha_witnessed"] = cert.alpha_witnessed;
  else
    doc["alpha_witnessed"] = "infinity";
  doc["cost"] = cert.cost_T;
  doc["endowment"] = cert.endowment;
  ordered_json T = ordered_json::array();
  for (int j : cert.blocking_T) T.push_back(inst.candidates[static_cast<std::size_t>(j)].id);
  doc["blocking_T"] = std::move(T);
  ordered_json S = ordered_json::array();
  for (int i : cert.blocking_S) S.push_back(inst.voters[static_cast<std::size_t>(i)].id);
  doc["blocking_S"] = std::move(S);
  return doc.dump(2) + "\n";
}

}  // namespace pbcore
