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

#include "pbcore/generators.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbcore/common.hpp"

namespace pbcore {

namespace {

using nlohmann::ordered_json;

// Stream salts for the generator family; disjoint from the solver's salts.
constexpr std::uint64_t kSizeSalt = 0x512e;
constexpr std::uint64_t kWeightSalt = 0x3317;
constexpr std::uint64_t kCoverSalt = 0xc03e;
constexpr std::uint64_t kElemSalt = 0xe1e3;

std::string cand_id(int j) { return "c" + std::to_string(j + 1); }
std::string voter_id(int i) { return "v" + std::to_string(i + 1); }
std::string elem_id(int e) { return "e" + std::to_string(e + 1); }

double draw_weight(Rng& rng, WeightDist dist) {
  const double u = rng.next_double();
  double w = 0.0;
  switch (dist) {
    case WeightDist::kUniform:
      w = u;
      break;
    case WeightDist::kExponential:
      w = -std::log1p(-u);  // inverse CDF of Exp(1); u < 1 always
      break;
  }
  // Keep weights strictly positive so every voter has a usable favorite.
  return std::max(w, 1e-6);
}

}  // namespace

const char* weight_dist_name(WeightDist dist) {
  switch (dist) {
    case WeightDist::kUniform: return "uniform";
    case WeightDist::kExponential: return "exponential";
  }
  return "uniform";
}

WeightDist parse_weight_dist(const std::string& name) {
  if (name == "uniform") return WeightDist::kUniform;
  if (name == "exponential") return WeightDist::kExponential;
  throw Error("unknown weight distribution '" + name + "' (use uniform or exponential)");
}

Instance random_additive(const RandomAdditiveParams& params) {
  if (params.n < 1) throw Error("random_additive needs at least one voter");
  if (params.m < 1) throw Error("random_additive needs at least one candidate");
  if (!(params.budget > 0.0)) throw Error("budget must be positive");
  if (!(params.size_min > 0.0) || params.size_min > params.size_max)
    throw Error("candidate sizes need 0 < size_min <= size_max");
  if (params.size_max > params.budget)
    throw Error("size_max exceeds the budget; no candidate would fit");

  ordered_json doc;
  doc["budget"] = params.budget;
  ordered_json candidates = ordered_json::array();
  Rng size_rng = Rng::derive(params.seed, {kSizeSalt});
  for (int j = 0; j < params.m; ++j) {
    const double span = params.size_max - params.size_min;
    const double size = params.size_min + span * size_rng.next_double();
    candidates.push_back({{"id", cand_id(j)}, {"size", size}});
  }
  doc["candidates"] = std::move(candidates);

  ordered_json voters = ordered_json::array();
  for (int i = 0; i < params.n; ++i) {
    Rng rng = Rng::derive(params.seed, {kWeightSalt, static_cast<std::uint64_t>(i)});
    ordered_json weights;
    for (int j = 0; j < params.m; ++j) weights[cand_id(j)] = draw_weight(rng, params.dist);
    voters.push_back({{"id", voter_id(i)},
                      {"utility", {{"type", "additive"}, {"weights", std::move(weights)}}}});
  }
  doc["voters"] = std::move(voters);
  return load_instance_from_json_text(doc.dump());
}

Instance random_coverage(const RandomCoverageParams& params) {
  if (params.n < 1) throw Error("random_coverage needs at least one voter");
  if (params.m < 1) throw Error("random_coverage needs at least one candidate");
  if (params.universe < 1) throw Error("the universe needs at least one element");
  if (!(params.density >= 0.0 && params.density <= 1.0))
    throw Error("density must lie in [0, 1]");
  if (!(params.budget >= 1.0))
    throw Error("budget must be at least 1 (candidates have unit size)");

  // Common cover structure: candidate j covers element e with prob density.
  std::vector<std::vector<int>> covers(static_cast<std::size_t>(params.m));
  Rng cover_rng = Rng::derive(params.seed, {kCoverSalt});
  bool any_covered = false;
  for (int j = 0; j < params.m; ++j) {
    for (int e = 0; e < params.universe; ++e) {
      if (cover_rng.bernoulli(params.density)) {
        covers[static_cast<std::size_t>(j)].push_back(e);
        any_covered = true;
      }
    }
  }
  // Degenerate draw (possible at low density): ensure at least one candidate
  // covers something, so every voter has a positive-value option.
  if (!any_covered) covers[0].push_back(0);

  ordered_json doc;
  doc["budget"] = params.budget;
  ordered_json candidates = ordered_json::array();
  for (int j = 0; j < params.m; ++j)
    candidates.push_back({{"id", cand_id(j)}, {"size", 1.0}});
  doc["candidates"] = std::move(candidates);

  ordered_json covers_doc;
  for (int j = 0; j < params.m; ++j) {
    ordered_json elems = ordered_json::array();
    for (int e : covers[static_cast<std::size_t>(j)]) elems.push_back(elem_id(e));
    covers_doc[cand_id(j)] = std::move(elems);
  }

  ordered_json voters = ordered_json::array();
  for (int i = 0; i < params.n; ++i) {
    Rng rng = Rng::derive(params.seed, {kElemSalt, static_cast<std::uint64_t>(i)});
    ordered_json weights;
    // Bounded away from zero: a covered element is always worth something.
    for (int e = 0; e < params.universe; ++e)
      weights[elem_id(e)] = 0.1 + 0.9 * rng.next_double();
    voters.push_back({{"id", voter_id(i)},
                      {"utility",
                       {{"type", "coverage"},
                        {"universe_weights", std::move(weights)},
                        {"covers", covers_doc}}}});
  }
  doc["voters"] = std::move(voters);
  return load_instance_from_json_text(doc.dump());
}

}  // namespace pbcore
