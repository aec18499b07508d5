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

// Command-line surface: solve, verify, gen, and bench.
//
// Exit codes form a fixed taxonomy for scripting:
//   0  success
//   1  IO, schema, or parameter errors
//   2  the Nash-welfare search failed to converge
//   3  a round exhausted its rounding attempts
//   4  verification exceeded the --threshold
//
// Environment: PBCORE_JOBS sets the worker count for bench sweeps and for
// sharded full verification; PBCORE_SEED_STREAM shifts all randomness to an
// independent stream without changing any flag (useful for replicated
// experiment batches).

#ifndef PBCORE_CLI_HPP_
#define PBCORE_CLI_HPP_

#include <iosfwd>

namespace pbcore {

// Parses argv and runs one command. Output streams are injectable so tests
// can capture them; the shipped binary passes std::cout and std::cerr.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pbcore

#endif  // PBCORE_CLI_HPP_
