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

// Shared plumbing: error type, seeded RNG with counter-based stream
// derivation, and a dense membership mask for committee subsets.

#ifndef PBCORE_COMMON_HPP_
#define PBCORE_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbcore {

// All library failures surface as this exception; the CLI maps it to exit
// codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// 64-bit mixing finalizer (SplitMix64). Used both as the PRNG step and to
// derive independent streams from (seed, counter...) tuples, so that a single
// user-facing seed deterministically covers every randomized stage.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Small deterministic PRNG (SplitMix64 sequence). Good enough statistical
// quality for Monte-Carlo estimation and rounding draws, trivially
// reproducible across platforms, and cheap to fork into substreams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  // Derives an independent substream from this generator's seed and a list of
  // counters (e.g. round index, attempt index). The derivation hashes rather
  // than advances, so substreams never depend on call order.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
    std::uint64_t s = mix64(seed);
    for (std::uint64_t c : counters) s = mix64(s ^ mix64(c + 0x632be59bd9b4e019ULL));
    return Rng(s);
  }

 private:
  std::uint64_t state_;
};

// Dense 0/1 membership mask over candidate indices. Oracles evaluate subsets
// through this representation; helpers convert to/from index lists.
using Mask = std::vector<std::uint8_t>;

inline Mask mask_from_members(int m, const std::vector<int>& members) {
  Mask mask(m, 0);
  for (int j : members) mask[j] = 1;
  return mask;
}

inline std::vector<int> members_from_mask(const Mask& mask) {
  std::vector<int> members;
  for (int j = 0; j < static_cast<int>(mask.size()); ++j)
    if (mask[j]) members.push_back(j);
  return members;
}

}  // namespace pbcore

#endif  // PBCORE_COMMON_HPP_
