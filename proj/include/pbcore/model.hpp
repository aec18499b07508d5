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

// Instance model: candidates with sizes, voters with monotone set-function
// utilities (additive, weighted coverage, and two synthetic "gadget"
// families), JSON (de)serialization, preprocessing, and the small/large
// candidate partition used by the solver.

#ifndef PBCORE_MODEL_HPP_
#define PBCORE_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbcore/common.hpp"

namespace pbcore {

struct Candidate {
  std::string id;
  double size = 1.0;
};

enum class OracleKind { kAdditive, kCoverage, kGadgetGeneral, kGadgetSubmodular };

const char* oracle_kind_name(OracleKind kind);

// One voter's monotone utility over candidate subsets.
//
// Additive and coverage utilities are normalized at load so that the largest
// singleton value is exactly 1. The gadget families are defined directly on
// the [0, 1]-bounded "fraction of gadget selected" scale and are kept
// unscaled; every downstream comparison (satisfaction tests, deviation
// ratios, core checks) is invariant to a per-voter scale factor, so this only
// affects the absolute numbers reported.
class UtilityOracle {
 public:
  // value() returns the normalized utility, raw_value() the unnormalized one.
  double value(std::span<const std::uint8_t> mask) const;
  double raw_value(std::span<const std::uint8_t> mask) const;
  double value_of_members(const std::vector<int>& members, int m) const;

  OracleKind kind() const { return kind_; }
  double scale_divisor() const { return scale_; }
  // Largest normalized singleton utility, max_j u'({j}).
  double max_singleton(int m) const;

  // Payload accessors (used by serialization, exact evaluation and the
  // deviation verifier). Additive weights are raw (unnormalized).
  const std::vector<double>& additive_weights() const { return weights_; }
  const std::vector<double>& element_weights() const { return elem_weights_; }
  const std::vector<std::string>& element_ids() const { return elem_ids_; }
  const std::vector<std::vector<int>>& covers() const { return covers_; }
  const std::vector<int>& gadget_favorite() const { return favorite_; }
  const std::vector<int>& gadget_second() const { return second_; }
  double gadget_param() const { return gadget_param_; }

  static UtilityOracle make_additive(std::vector<double> weights);
  static UtilityOracle make_coverage(std::vector<double> elem_weights,
                                     std::vector<std::string> elem_ids,
                                     std::vector<std::vector<int>> covers);
  static UtilityOracle make_gadget(OracleKind kind, std::vector<int> favorite,
                                   std::vector<int> second, double param);

  // Recomputes the normalization divisor (largest raw singleton for the
  // normalized families, 1 for the gadget families). Idempotent.
  void normalize(int m);

 private:
  OracleKind kind_ = OracleKind::kAdditive;
  double scale_ = 1.0;  // value() = raw_value() / scale_

  // kAdditive: per-candidate weights (dense over candidate indices).
  std::vector<double> weights_;
  // kCoverage: per-voter element universe with weights; covers_[j] lists the
  // element indices candidate j covers.
  std::vector<double> elem_weights_;
  std::vector<std::string> elem_ids_;
  std::vector<std::vector<int>> covers_;
  // Gadget families: favorite/second candidate index sets plus the family
  // parameter (z for the submodular variant, alpha_lb for the general one).
  std::vector<int> favorite_;
  std::vector<int> second_;
  double gadget_param_ = 0.0;
};

struct Voter {
  std::string id;
  UtilityOracle oracle;
};

// A loaded, preprocessed instance. Candidates larger than the budget and
// voters indifferent to the full candidate set are dropped at load; the
// remaining candidates get dense indices in file order.
class Instance {
 public:
  double budget = 0.0;
  double epsilon = 0.01;
  std::vector<Candidate> candidates;
  std::vector<Voter> voters;
  // Human-readable notes about dropped candidates/voters.
  std::vector<std::string> warnings;

  int num_candidates() const { return static_cast<int>(candidates.size()); }
  int num_voters() const { return static_cast<int>(voters.size()); }
  double size_of(int j) const { return candidates[j].size; }
  double total_size() const;
  double cost_of(const std::vector<int>& members) const;
  // Dense index for a candidate id; nullopt if unknown (e.g. dropped).
  std::optional<int> candidate_index(const std::string& id) const;

  // Validates structural invariants; throws Error on violation.
  void validate() const;

 private:
  friend Instance load_instance_from_json_text(const std::string& text);
  std::unordered_map<std::string, int> index_by_id_;
};

// Small/large split: small candidates (size <= eps*b/m) are always fully
// funded, the solver only optimizes over the large ones.
struct CandidatePartition {
  double threshold = 0.0;
  std::vector<int> small;
  std::vector<int> large;
  double small_cost = 0.0;
  double large_cost = 0.0;
};

CandidatePartition partition_candidates(const Instance& inst);

// JSON I/O. Parsing accepts any key order; serialization is canonical
// (candidates in index order, dense additive weights) so generated files
// round-trip byte-identically.
Instance load_instance(const std::string& path);
Instance load_instance_from_json_text(const std::string& text);
std::string serialize_instance(const Instance& inst);
void save_instance(const Instance& inst, const std::string& path);

// Incremental subset evaluator used by enumeration-heavy callers: push/pop
// candidates and read the current utility in O(marginal) instead of O(set).
class OracleCursor {
 public:
  OracleCursor(const UtilityOracle& oracle, int m);
  void push(int j);
  void pop(int j);  // j must be the most recently pushed candidate
  double value() const { return value_ / oracle_->scale_divisor(); }

 private:
  const UtilityOracle* oracle_;
  double value_ = 0.0;  // raw running value for additive/coverage
  std::vector<int> cover_count_;  // coverage: per-element multiplicity
  int count_favorite_ = 0;
  int count_second_ = 0;
  void recompute_gadget();
};

}  // namespace pbcore

#endif  // PBCORE_MODEL_HPP_
