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

// Shared hand-built fixtures for the unit tests.

#ifndef PBCORE_TESTS_FIXTURES_HPP_
#define PBCORE_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "pbcore/model.hpp"

namespace pbcore_tests {

// Coverage voter over three candidates; singleton values 3, 1.5, 2.5 before
// normalization (scale 3).
inline pbcore::Instance coverage3() {
  return pbcore::load_instance_from_json_text(R"({
    "budget": 3,
    "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}, {"id": "c", "size": 1}],
    "voters": [
      {"id": "v1", "utility": {"type": "coverage",
        "universe_weights": {"e1": 2, "e2": 1, "e3": 0.5},
        "covers": {"a": ["e1", "e2"], "b": ["e2", "e3"], "c": ["e1", "e3"]}}}
    ]
  })");
}

// Three cyclic additive voters over three unit-size candidates.
inline pbcore::Instance cyclic_additive3() {
  return pbcore::load_instance_from_json_text(R"({
    "budget": 1.5,
    "candidates": [{"id": "c1", "size": 1}, {"id": "c2", "size": 1}, {"id": "c3", "size": 1}],
    "voters": [
      {"id": "v1", "utility": {"type": "additive", "weights": {"c1": 2, "c2": 1, "c3": 0}}},
      {"id": "v2", "utility": {"type": "additive", "weights": {"c1": 0, "c2": 2, "c3": 1}}},
      {"id": "v3", "utility": {"type": "additive", "weights": {"c1": 1, "c2": 0, "c3": 2}}}
    ]
  })");
}

// One gadget-submodular voter: favorite {c1..c5}, second {c6..c10}.
inline pbcore::Instance gadget10(const std::string& type, const std::string& param) {
  std::string cands, fav, sec;
  for (int k = 1; k <= 10; ++k) {
    cands += std::string(k > 1 ? ", " : "") + "{\"id\": \"c" + std::to_string(k) +
             "\", \"size\": 1}";
    std::string quoted = "\"c" + std::to_string(k) + "\"";
    if (k <= 5)
      fav += (k > 1 ? ", " : "") + quoted;
    else
      sec += (k > 6 ? ", " : "") + quoted;
  }
  return pbcore::load_instance_from_json_text(
      "{\"budget\": 10, \"candidates\": [" + cands +
      "], \"voters\": [{\"id\": \"v1\", \"utility\": {\"type\": \"" + type +
      "\", \"favorite\": [" + fav + "], \"second\": [" + sec + "], " + param + "}}]}");
}

inline std::vector<pbcore::Instance> oracle_zoo() {
  std::vector<pbcore::Instance> zoo;
  zoo.push_back(coverage3());
  zoo.push_back(cyclic_additive3());
  zoo.push_back(gadget10("gadget_submodular", "\"z\": 0.7"));
  zoo.push_back(gadget10("gadget_general", "\"alpha_lb\": 4"));
  return zoo;
}

inline std::vector<int> all_voters(const pbcore::Instance& inst) {
  std::vector<int> w(inst.num_voters());
  for (int i = 0; i < inst.num_voters(); ++i) w[i] = i;
  return w;
}

}  // namespace pbcore_tests

#endif  // PBCORE_TESTS_FIXTURES_HPP_
