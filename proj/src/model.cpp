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

#include "pbcore/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace pbcore {

using ordered_json = nlohmann::ordered_json;

const char* oracle_kind_name(OracleKind kind) {
  switch (kind) {
    case OracleKind::kAdditive: return "additive";
    case OracleKind::kCoverage: return "coverage";
    case OracleKind::kGadgetGeneral: return "gadget_general";
    case OracleKind::kGadgetSubmodular: return "gadget_submodular";
  }
  return "unknown";
}

namespace {

int count_in_mask(const std::vector<int>& set, std::span<const std::uint8_t> mask) {
  int count = 0;
  for (int j : set) count += mask[j] ? 1 : 0;
  return count;
}

double gadget_value(OracleKind kind, double param, int count_f, int size_f,
                    int count_s, int size_s) {
  const double x = static_cast<double>(count_f) / size_f;
  const double y = static_cast<double>(count_s) / size_s;
  if (kind == OracleKind::kGadgetGeneral) {
    // (alpha_lb + 1) * [favorite gadget fully selected] + [second fully
    // selected]; integer count comparisons avoid float equality.
    return (param + 1.0) * (count_f == size_f ? 1.0 : 0.0) +
           (count_s == size_s ? 1.0 : 0.0);
  }
  return x + param * (1.0 - x) * y;
}

}  // namespace

double UtilityOracle::raw_value(std::span<const std::uint8_t> mask) const {
  switch (kind_) {
    case OracleKind::kAdditive: {
      double total = 0.0;
      for (std::size_t j = 0; j < mask.size(); ++j)
        if (mask[j]) total += weights_[j];
      return total;
    }
    case OracleKind::kCoverage: {
      // Epoch-stamped scratch: avoids clearing per call and allocation in
      // sampling loops. Thread-local, so concurrent readers stay safe.
      thread_local std::vector<std::uint64_t> stamp;
      thread_local std::uint64_t epoch = 0;
      if (stamp.size() < elem_weights_.size()) stamp.resize(elem_weights_.size(), 0);
      ++epoch;
      double total = 0.0;
      for (std::size_t j = 0; j < mask.size(); ++j) {
        if (!mask[j]) continue;
        for (int e : covers_[j]) {
          if (stamp[e] != epoch) {
            stamp[e] = epoch;
            total += elem_weights_[e];
          }
        }
      }
      return total;
    }
    case OracleKind::kGadgetGeneral:
    case OracleKind::kGadgetSubmodular:
      return gadget_value(kind_, gadget_param_, count_in_mask(favorite_, mask),
                          static_cast<int>(favorite_.size()),
                          count_in_mask(second_, mask),
                          static_cast<int>(second_.size()));
  }
  return 0.0;
}

double UtilityOracle::value(std::span<const std::uint8_t> mask) const {
  return raw_value(mask) / scale_;
}

double UtilityOracle::value_of_members(const std::vector<int>& members, int m) const {
  Mask mask = mask_from_members(m, members);
  return value(mask);
}

double UtilityOracle::max_singleton(int m) const {
  Mask mask(m, 0);
  double best = 0.0;
  for (int j = 0; j < m; ++j) {
    mask[j] = 1;
    best = std::max(best, value(mask));
    mask[j] = 0;
  }
  return best;
}

UtilityOracle UtilityOracle::make_additive(std::vector<double> weights) {
  UtilityOracle oracle;
  oracle.kind_ = OracleKind::kAdditive;
  oracle.weights_ = std::move(weights);
  return oracle;
}

UtilityOracle UtilityOracle::make_coverage(std::vector<double> elem_weights,
                                           std::vector<std::string> elem_ids,
                                           std::vector<std::vector<int>> covers) {
  UtilityOracle oracle;
  oracle.kind_ = OracleKind::kCoverage;
  oracle.elem_weights_ = std::move(elem_weights);
  oracle.elem_ids_ = std::move(elem_ids);
  oracle.covers_ = std::move(covers);
  return oracle;
}

UtilityOracle UtilityOracle::make_gadget(OracleKind kind, std::vector<int> favorite,
                                         std::vector<int> second, double param) {
  UtilityOracle oracle;
  oracle.kind_ = kind;
  oracle.favorite_ = std::move(favorite);
  oracle.second_ = std::move(second);
  oracle.gadget_param_ = param;
  return oracle;
}

void UtilityOracle::normalize(int m) {
  if (kind_ == OracleKind::kGadgetGeneral || kind_ == OracleKind::kGadgetSubmodular) {
    // Gadget utilities live on the fraction-of-gadget scale already; keep
    // them unscaled (all consumers are invariant to per-voter scaling).
    scale_ = 1.0;
    return;
  }
  scale_ = 1.0;  // reset so max_singleton sees raw values; idempotent
  Mask mask(m, 0);
  double best = 0.0;
  for (int j = 0; j < m; ++j) {
    mask[j] = 1;
    best = std::max(best, raw_value(mask));
    mask[j] = 0;
  }
  if (best > 0.0) scale_ = best;
}

double Instance::total_size() const {
  double total = 0.0;
  for (const Candidate& c : candidates) total += c.size;
  return total;
}

double Instance::cost_of(const std::vector<int>& members) const {
  double total = 0.0;
  for (int j : members) total += candidates[j].size;
  return total;
}

std::optional<int> Instance::candidate_index(const std::string& id) const {
  auto it = index_by_id_.find(id);
  if (it == index_by_id_.end()) return std::nullopt;
  return it->second;
}

void Instance::validate() const {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw Error("budget must be positive and finite");
  if (!(epsilon > 0.0) || !(epsilon < 0.05))
    throw Error("epsilon must lie in (0, 1/20)");
  if (candidates.empty()) throw Error("instance has no candidates after preprocessing");
  if (voters.empty()) throw Error("instance has no voters after filtering");
  for (const Candidate& c : candidates) {
    if (!(c.size > 0.0) || !std::isfinite(c.size))
      throw Error("candidate '" + c.id + "' has non-positive size");
    if (c.size > budget)
      throw Error("candidate '" + c.id + "' exceeds the budget after preprocessing");
  }
}

CandidatePartition partition_candidates(const Instance& inst) {
  CandidatePartition part;
  const int m = inst.num_candidates();
  part.threshold = inst.epsilon * inst.budget / m;
  for (int j = 0; j < m; ++j) {
    if (inst.size_of(j) <= part.threshold) {
      part.small.push_back(j);
      part.small_cost += inst.size_of(j);
    } else {
      part.large.push_back(j);
      part.large_cost += inst.size_of(j);
    }
  }
  return part;
}

namespace {

double as_positive_number(const ordered_json& v, const std::string& what) {
  if (!v.is_number()) throw Error("schema violation: " + what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x <= 0.0) throw Error(what + " must be positive and finite");
  return x;
}

double as_nonneg_number(const ordered_json& v, const std::string& what) {
  if (!v.is_number()) throw Error("schema violation: " + what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < 0.0) throw Error(what + " must be non-negative and finite");
  return x;
}

// Resolves a candidate id against the full id set; returns the dense index of
// a kept candidate, nullopt for a known-but-dropped one, throws otherwise.
std::optional<int> resolve_candidate(
    const std::unordered_map<std::string, int>& kept,
    const std::unordered_map<std::string, int>& seen, const std::string& id,
    const std::string& context) {
  auto it = kept.find(id);
  if (it != kept.end()) return it->second;
  if (seen.count(id)) return std::nullopt;  // dropped (oversized)
  throw Error("schema violation: unknown candidate id '" + id + "' in " + context);
}

std::vector<int> parse_gadget_set(const ordered_json& arr,
                                  const std::unordered_map<std::string, int>& kept,
                                  const std::unordered_map<std::string, int>& seen,
                                  const std::string& context) {
  if (!arr.is_array() || arr.empty())
    throw Error("schema violation: " + context + " must be a non-empty array");
  std::vector<int> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw Error("schema violation: " + context + " entries must be strings");
    auto idx = resolve_candidate(kept, seen, v.get<std::string>(), context);
    if (!idx) continue;
    if (std::find(out.begin(), out.end(), *idx) != out.end())
      throw Error("schema violation: duplicate candidate in " + context);
    out.push_back(*idx);
  }
  if (out.empty()) throw Error(context + " is empty after preprocessing");
  return out;
}

UtilityOracle parse_oracle(const ordered_json& u, int m,
                           const std::unordered_map<std::string, int>& kept,
                           const std::unordered_map<std::string, int>& seen,
                           const std::string& voter_id) {
  if (!u.is_object() || !u.contains("type") || !u.at("type").is_string())
    throw Error("schema violation: voter '" + voter_id + "' utility needs a string 'type'");
  const std::string type = u.at("type").get<std::string>();
  const std::string ctx = "voter '" + voter_id + "'";

  if (type == "additive") {
    if (!u.contains("weights") || !u.at("weights").is_object())
      throw Error("schema violation: " + ctx + " additive utility needs a 'weights' object");
    std::vector<double> weights(m, 0.0);
    for (const auto& [cand_id, w] : u.at("weights").items()) {
      auto idx = resolve_candidate(kept, seen, cand_id, ctx + " weights");
      const double val = as_nonneg_number(w, ctx + " weight for '" + cand_id + "'");
      if (idx) weights[*idx] = val;
    }
    return UtilityOracle::make_additive(std::move(weights));
  }

  if (type == "coverage") {
    if (!u.contains("universe_weights") || !u.at("universe_weights").is_object())
      throw Error("schema violation: " + ctx + " coverage utility needs 'universe_weights'");
    if (!u.contains("covers") || !u.at("covers").is_object())
      throw Error("schema violation: " + ctx + " coverage utility needs 'covers'");
    std::vector<std::string> elem_ids;
    std::vector<double> elem_weights;
    std::unordered_map<std::string, int> elem_index;
    for (const auto& [elem_id, w] : u.at("universe_weights").items()) {
      if (elem_index.count(elem_id))
        throw Error("schema violation: " + ctx + " duplicate universe element '" + elem_id + "'");
      elem_index[elem_id] = static_cast<int>(elem_ids.size());
      elem_ids.push_back(elem_id);
      elem_weights.push_back(as_nonneg_number(w, ctx + " weight of element '" + elem_id + "'"));
    }
    std::vector<std::vector<int>> covers(m);
    for (const auto& [cand_id, elems] : u.at("covers").items()) {
      auto idx = resolve_candidate(kept, seen, cand_id, ctx + " covers");
      if (!elems.is_array())
        throw Error("schema violation: " + ctx + " covers entries must be arrays");
      if (!idx) continue;
      for (const auto& e : elems) {
        if (!e.is_string())
          throw Error("schema violation: " + ctx + " covered elements must be strings");
        auto it = elem_index.find(e.get<std::string>());
        if (it == elem_index.end())
          throw Error("schema violation: " + ctx + " covers unknown element '" +
                      e.get<std::string>() + "'");
        if (std::find(covers[*idx].begin(), covers[*idx].end(), it->second) !=
            covers[*idx].end())
          throw Error("schema violation: " + ctx + " lists element '" +
                      e.get<std::string>() + "' twice for one candidate");
        covers[*idx].push_back(it->second);
      }
    }
    return UtilityOracle::make_coverage(std::move(elem_weights), std::move(elem_ids),
                                        std::move(covers));
  }

  if (type == "gadget_general" || type == "gadget_submodular") {
    if (!u.contains("favorite") || !u.contains("second"))
      throw Error("schema violation: " + ctx + " gadget utility needs 'favorite' and 'second'");
    std::vector<int> favorite =
        parse_gadget_set(u.at("favorite"), kept, seen, ctx + " favorite gadget");
    std::vector<int> second =
        parse_gadget_set(u.at("second"), kept, seen, ctx + " second gadget");
    for (int j : favorite)
      if (std::find(second.begin(), second.end(), j) != second.end())
        throw Error("schema violation: " + ctx + " favorite and second gadgets overlap");
    if (type == "gadget_submodular") {
      if (!u.contains("z")) throw Error("schema violation: " + ctx + " needs parameter 'z'");
      const double z = as_positive_number(u.at("z"), ctx + " parameter z");
      if (z > 1.0) throw Error(ctx + " parameter z must lie in (0, 1]");
      return UtilityOracle::make_gadget(OracleKind::kGadgetSubmodular,
                                        std::move(favorite), std::move(second), z);
    }
    if (!u.contains("alpha_lb"))
      throw Error("schema violation: " + ctx + " needs parameter 'alpha_lb'");
    const double alpha_lb = as_nonneg_number(u.at("alpha_lb"), ctx + " parameter alpha_lb");
    return UtilityOracle::make_gadget(OracleKind::kGadgetGeneral, std::move(favorite),
                                      std::move(second), alpha_lb);
  }

  throw Error("schema violation: " + ctx + " has unknown utility type '" + type + "'");
}

}  // namespace

Instance load_instance_from_json_text(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw Error("schema violation: top level must be an object");
  if (!doc.contains("budget")) throw Error("schema violation: missing 'budget'");
  if (!doc.contains("candidates") || !doc.at("candidates").is_array())
    throw Error("schema violation: missing 'candidates' array");
  if (!doc.contains("voters") || !doc.at("voters").is_array())
    throw Error("schema violation: missing 'voters' array");

  Instance inst;
  inst.budget = as_positive_number(doc.at("budget"), "budget");
  if (doc.contains("epsilon")) {
    inst.epsilon = doc.at("epsilon").get<double>();
    if (!(inst.epsilon > 0.0) || !(inst.epsilon < 0.05))
      throw Error("epsilon must lie in (0, 1/20)");
  }

  // Candidates: validate, then drop the ones no budget could ever afford.
  std::unordered_map<std::string, int> seen;  // id -> position in file
  std::unordered_map<std::string, int> kept;  // id -> dense index
  int file_pos = 0;
  for (const auto& c : doc.at("candidates")) {
    if (!c.is_object() || !c.contains("id") || !c.at("id").is_string() || !c.contains("size"))
      throw Error("schema violation: each candidate needs an 'id' string and a 'size'");
    const std::string id = c.at("id").get<std::string>();
    if (seen.count(id)) throw Error("schema violation: duplicate candidate id '" + id + "'");
    seen[id] = file_pos++;
    const double size = as_positive_number(c.at("size"), "size of candidate '" + id + "'");
    if (size > inst.budget) {
      inst.warnings.push_back("dropped candidate '" + id + "': size exceeds budget");
      continue;
    }
    kept[id] = static_cast<int>(inst.candidates.size());
    inst.candidates.push_back({id, size});
  }
  if (inst.candidates.empty()) throw Error("instance has no candidates after preprocessing");
  const int m = inst.num_candidates();

  std::unordered_map<std::string, bool> voter_ids;
  for (const auto& v : doc.at("voters")) {
    if (!v.is_object() || !v.contains("id") || !v.at("id").is_string() || !v.contains("utility"))
      throw Error("schema violation: each voter needs an 'id' string and a 'utility' object");
    Voter voter;
    voter.id = v.at("id").get<std::string>();
    if (voter_ids[voter.id])
      throw Error("schema violation: duplicate voter id '" + voter.id + "'");
    voter_ids[voter.id] = true;
    voter.oracle = parse_oracle(v.at("utility"), m, kept, seen, voter.id);
    const Mask full(m, 1);
    if (voter.oracle.raw_value(full) <= 0.0) {
      inst.warnings.push_back("dropped voter '" + voter.id +
                              "': indifferent to the full candidate set");
      continue;
    }
    voter.oracle.normalize(m);
    inst.voters.push_back(std::move(voter));
  }
  if (inst.voters.empty()) throw Error("instance has no voters after filtering");

  inst.index_by_id_ = std::move(kept);
  inst.validate();
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instance file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_instance_from_json_text(buffer.str());
}

std::string serialize_instance(const Instance& inst) {
  ordered_json doc;
  doc["budget"] = inst.budget;
  doc["epsilon"] = inst.epsilon;
  doc["candidates"] = ordered_json::array();
  for (const Candidate& c : inst.candidates)
    doc["candidates"].push_back({{"id", c.id}, {"size", c.size}});
  doc["voters"] = ordered_json::array();
  for (const Voter& v : inst.voters) {
    ordered_json u;
    switch (v.oracle.kind()) {
      case OracleKind::kAdditive: {
        u["type"] = "additive";
        ordered_json weights = ordered_json::object();
        for (int j = 0; j < inst.num_candidates(); ++j)
          weights[inst.candidates[j].id] = v.oracle.additive_weights()[j];
        u["weights"] = std::move(weights);
        break;
      }
      case OracleKind::kCoverage: {
        u["type"] = "coverage";
        ordered_json universe = ordered_json::object();
        for (std::size_t e = 0; e < v.oracle.element_ids().size(); ++e)
          universe[v.oracle.element_ids()[e]] = v.oracle.element_weights()[e];
        u["universe_weights"] = std::move(universe);
        ordered_json covers = ordered_json::object();
        for (int j = 0; j < inst.num_candidates(); ++j) {
          ordered_json elems = ordered_json::array();
          for (int e : v.oracle.covers()[j]) elems.push_back(v.oracle.element_ids()[e]);
          covers[inst.candidates[j].id] = std::move(elems);
        }
        u["covers"] = std::move(covers);
        break;
      }
      case OracleKind::kGadgetGeneral:
      case OracleKind::kGadgetSubmodular: {
        u["type"] = oracle_kind_name(v.oracle.kind());
        ordered_json favorite = ordered_json::array();
        for (int j : v.oracle.gadget_favorite()) favorite.push_back(inst.candidates[j].id);
        ordered_json second = ordered_json::array();
        for (int j : v.oracle.gadget_second()) second.push_back(inst.candidates[j].id);
        u["favorite"] = std::move(favorite);
        u["second"] = std::move(second);
        u[v.oracle.kind() == OracleKind::kGadgetSubmodular ? "z" : "alpha_lb"] =
            v.oracle.gadget_param();
        break;
      }
    }
    doc["voters"].push_back({{"id", v.id}, {"utility", std::move(u)}});
  }
  return doc.dump(2) + "\n";
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write instance file '" + path + "'");
  out << serialize_instance(inst);
}

OracleCursor::OracleCursor(const UtilityOracle& oracle, int m) : oracle_(&oracle) {
  if (oracle.kind() == OracleKind::kCoverage)
    cover_count_.assign(oracle.element_weights().size(), 0);
  (void)m;
  if (oracle.kind() == OracleKind::kGadgetGeneral ||
      oracle.kind() == OracleKind::kGadgetSubmodular)
    recompute_gadget();
}

void OracleCursor::push(int j) {
  switch (oracle_->kind()) {
    case OracleKind::kAdditive:
      value_ += oracle_->additive_weights()[j];
      break;
    case OracleKind::kCoverage:
      for (int e : oracle_->covers()[j])
        if (cover_count_[e]++ == 0) value_ += oracle_->element_weights()[e];
      break;
    default: {
      const auto& fav = oracle_->gadget_favorite();
      const auto& sec = oracle_->gadget_second();
      if (std::find(fav.begin(), fav.end(), j) != fav.end()) ++count_favorite_;
      if (std::find(sec.begin(), sec.end(), j) != sec.end()) ++count_second_;
      recompute_gadget();
    }
  }
}

void OracleCursor::pop(int j) {
  switch (oracle_->kind()) {
    case OracleKind::kAdditive:
      value_ -= oracle_->additive_weights()[j];
      break;
    case OracleKind::kCoverage:
      for (int e : oracle_->covers()[j])
        if (--cover_count_[e] == 0) value_ -= oracle_->element_weights()[e];
      break;
    default: {
      const auto& fav = oracle_->gadget_favorite();
      const auto& sec = oracle_->gadget_second();
      if (std::find(fav.begin(), fav.end(), j) != fav.end()) --count_favorite_;
      if (std::find(sec.begin(), sec.end(), j) != sec.end()) --count_second_;
      recompute_gadget();
    }
  }
}

void OracleCursor::recompute_gadget() {
  value_ = gadget_value(oracle_->kind(), oracle_->gadget_param(), count_favorite_,
                        static_cast<int>(oracle_->gadget_favorite().size()),
                        count_second_, static_cast<int>(oracle_->gadget_second().size()));
}

}  // namespace pbcore
