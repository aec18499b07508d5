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

#include "pbcore/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pbcore/model.hpp"

using namespace pbcore;
using nlohmann::ordered_json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("pbcore");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult result;
  result.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

// Scratch files live in the test's working directory, prefixed to avoid
// clashes between cases.
std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = "cli_scratch_" + name;
  std::ofstream f(path, std::ios::binary);
  REQUIRE(f.good());
  f << text;
  f.close();
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kTwoGoods = R"({
  "budget": 2,
  "candidates": [{"id": "c1", "size": 1}, {"id": "c2", "size": 1}],
  "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"c1": 10, "c2": 9}}}]
})";

const char* kStarvedPair = R"({
  "budget": 2,
  "candidates": [{"id": "a1", "size": 1}, {"id": "a2", "size": 1},
                 {"id": "b1", "size": 1}, {"id": "b2", "size": 1}],
  "voters": [
    {"id": "v1", "utility": {"type": "gadget_general", "alpha_lb": 4,
      "favorite": ["a1", "a2"], "second": ["b1", "b2"]}},
    {"id": "v2", "utility": {"type": "gadget_general", "alpha_lb": 4,
      "favorite": ["b1", "b2"], "second": ["a1", "a2"]}}
  ]
})";

// An RAII guard for environment overrides used by a few cases.
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    ::setenv(name, value, 1);
  }
  ~EnvGuard() { ::unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST_CASE("gen emits deterministic canonical instances") {
  const CliResult a = run({"gen", "lb-submodular"});
  REQUIRE(a.code == 0);
  const Instance inst = load_instance_from_json_text(a.out);
  CHECK(inst.num_voters() == 6);
  CHECK(inst.num_candidates() == 30);
  CHECK(inst.budget == doctest::Approx(15.0));
  CHECK(run({"gen", "lb-submodular"}).out == a.out);

  const CliResult r1 = run({"gen", "random-additive", "--n", "4", "--m", "6", "--b", "3",
                            "--seed", "1"});
  REQUIRE(r1.code == 0);
  CHECK(run({"gen", "random-additive", "--n", "4", "--m", "6", "--b", "3", "--seed", "1"}).out ==
        r1.out);
  CHECK(run({"gen", "random-additive", "--n", "4", "--m", "6", "--b", "3", "--seed", "2"}).out !=
        r1.out);

  const CliResult cov = run({"gen", "random-coverage", "--n", "3", "--m", "5", "--universe",
                             "6", "--density", "0.4", "--b", "3", "--seed", "9"});
  REQUIRE(cov.code == 0);
  CHECK(load_instance_from_json_text(cov.out).num_candidates() == 5);

  const CliResult bad = run({"gen", "lb-general"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("alpha-lb") != std::string::npos);

  const CliResult ex1 = run({"gen", "lb-general", "--alpha-lb", "1000", "--gadget-size", "2"});
  REQUIRE(ex1.code == 0);
  CHECK(load_instance_from_json_text(ex1.out).num_candidates() == 12);
}

TEST_CASE("solve writes a reproducible report and a summary line") {
  const std::string inst_path =
      write_file("solve_in.json", run({"gen", "random-additive", "--n", "3", "--m", "5", "--b",
                                       "3", "--seed", "4"})
                                      .out);
  const std::string out_path = "cli_scratch_solve_out.json";
  const CliResult r = run({"solve", "--in", inst_path, "--preset", "additive", "--seed", "2",
                           "--no-timestamp", "--out", out_path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());  // the report went to the file
  CHECK(r.err.find("guarantee 9.27") != std::string::npos);
  const std::string first = read_file(out_path);
  const ordered_json doc = ordered_json::parse(first);
  CHECK(doc.at("method") == "additive");
  CHECK(doc.at("guarantee_label") == "paper, Lindahl-based");
  CHECK(doc.at("committee").is_array());
  CHECK(!doc.contains("timestamp"));

  // Byte-identical rerun with the same seed; timestamp only when asked.
  run({"solve", "--in", inst_path, "--preset", "additive", "--seed", "2", "--no-timestamp",
       "--out", out_path});
  CHECK(read_file(out_path) == first);
  const CliResult stamped =
      run({"solve", "--in", inst_path, "--preset", "additive", "--seed", "2"});
  REQUIRE(stamped.code == 0);
  CHECK(ordered_json::parse(stamped.out).contains("timestamp"));
}

TEST_CASE("solve maps failures onto the exit-code taxonomy") {
  CHECK(run({"solve", "--in", "does_not_exist.json"}).code == 1);

  const std::string zero = write_file("zero_voters.json", R"({
    "budget": 2,
    "candidates": [{"id": "c1", "size": 1}],
    "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"c1": 0}}}]
  })");
  const CliResult dropped = run({"solve", "--in", zero});
  CHECK(dropped.code == 1);
  CHECK(dropped.err.find("no voters after filtering") != std::string::npos);

  const std::string add = write_file("nc.json", run({"gen", "random-additive", "--n", "3",
                                                     "--m", "5", "--b", "3", "--seed", "4"})
                                                    .out);
  CHECK(run({"solve", "--in", add, "--preset", "additive", "--nw-max-iters", "1"}).code == 2);

  const std::string starved = write_file("starved.json", kStarvedPair);
  CHECK(run({"solve", "--in", starved, "--seed", "3"}).code == 3);

  // Parameter overrides are domain-checked before any solving happens.
  const CliResult bad_kappa = run({"solve", "--in", add, "--kappa", "0.05"});
  CHECK(bad_kappa.code == 1);
}

TEST_CASE("verify reports min_alpha against the threshold") {
  const std::string inst = write_file("goods.json", kTwoGoods);
  const std::string everything = write_file("committee_full.json", R"(["c1", "c2"])");
  const CliResult whole = run({"verify", "--in", inst, "--committee", everything});
  REQUIRE(whole.code == 0);
  const ordered_json whole_doc = ordered_json::parse(whole.out);
  CHECK(whole_doc.at("min_alpha").get<double>() <= 1.0 + 1e-12);
  CHECK(whole_doc.at("certificate").is_null());

  // The empty committee owes a factor 1.9 here (both goods beat the best
  // singleton defense): above threshold 1.5, below 2.
  const std::string empty = write_file("committee_empty.json", R"({"committee": []})");
  const CliResult blocked =
      run({"verify", "--in", inst, "--committee", empty, "--threshold", "1.5"});
  CHECK(blocked.code == 4);
  const ordered_json blocked_doc = ordered_json::parse(blocked.out);
  CHECK(blocked_doc.at("min_alpha").get<double>() == doctest::Approx(1.9).epsilon(1e-12));
  CHECK(blocked_doc.at("certificate").is_object());
  CHECK(run({"verify", "--in", inst, "--committee", empty, "--threshold", "2"}).code == 0);

  const std::string bogus = write_file("committee_bogus.json", R"(["nope"])");
  const CliResult unknown = run({"verify", "--in", inst, "--committee", bogus});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("unknown candidate") != std::string::npos);
}

TEST_CASE("verify refuses oversized enumerations with an estimate") {
  const std::string big = write_file("big.json", run({"gen", "lb-submodular"}).out);
  const std::string empty = write_file("committee_none.json", "[]");
  const CliResult refusal = run({"verify", "--in", big, "--committee", empty});
  CHECK(refusal.code == 1);
  CHECK(refusal.err.find("2^m") != std::string::npos);
  CHECK(refusal.err.find("1.07e+09") != std::string::npos);

  // The profile specialization handles the same instance instantly.
  const CliResult profiled =
      run({"verify", "--in", big, "--committee", empty, "--mode", "profile"});
  CHECK(profiled.code == 4);  // far outside the core at threshold 1
  CHECK(ordered_json::parse(profiled.out).at("min_alpha").get<double>() > 1.0);

  const CliResult strict_profile = run(
      {"verify", "--in", big, "--committee", empty, "--mode", "profile", "--strict-additament"});
  CHECK(strict_profile.code == 1);
  CHECK(strict_profile.err.find("--mode full") != std::string::npos);
}

TEST_CASE("probe mode refutes fractional-core claims") {
  const std::string inst = write_file("probe.json", kTwoGoods);
  const std::string empty = write_file("probe_committee.json", "[]");
  const CliResult hot = run({"verify", "--in", inst, "--committee", empty, "--mode", "probe",
                             "--threshold", "1", "--probes", "50", "--seed", "3"});
  CHECK(hot.code == 4);
  const ordered_json hot_doc = ordered_json::parse(hot.out);
  CHECK(hot_doc.at("violation_found") == true);
  CHECK(hot_doc.at("violation").at("S").is_array());

  const std::string full = write_file("probe_full.json", R"(["c1", "c2"])");
  const CliResult calm = run({"verify", "--in", inst, "--committee", full, "--mode", "probe",
                              "--threshold", "1000000", "--probes", "50"});
  CHECK(calm.code == 0);
  CHECK(ordered_json::parse(calm.out).at("violation").is_null());
}

TEST_CASE("bench sweeps produce ordered reproducible CSV") {
  const std::vector<std::string> sweep = {"bench", "--family", "random-additive", "--runs",
                                          "3",     "--n",      "3",
                                          "--m",   "4",        "--b",
                                          "2",     "--seed0",  "5"};
  const CliResult r = run(sweep);
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "seed,n,m,rounds,nw_iters,round_attempts,wall_ms,min_alpha,guarantee");
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(lines, line);) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    for (std::string cell; std::getline(cs, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 9);
    CHECK(rows[i][0] == std::to_string(5 + i));  // seeds in input order
    CHECK(!rows[i][7].empty());                  // verified: m = 4 is enumerable
    CHECK(std::stod(rows[i][7]) <= 9.27);
    CHECK(rows[i][8] == "9.27");
  }

  // Rerun: identical except the wall-clock column.
  const CliResult again = run(sweep);
  std::istringstream lines_a(r.out), lines_b(again.out);
  std::string la, lb;
  while (std::getline(lines_a, la) && std::getline(lines_b, lb)) {
    std::vector<std::string> ca, cb;
    std::istringstream sa(la), sb(lb);
    for (std::string c; std::getline(sa, c, ',');) ca.push_back(c);
    for (std::string c; std::getline(sb, c, ',');) cb.push_back(c);
    REQUIRE(ca.size() == cb.size());
    for (std::size_t k = 0; k < ca.size(); ++k)
      if (k != 6) CHECK(ca[k] == cb[k]);
  }

  // Guard propagation: rows too large to verify leave min_alpha empty.
  const CliResult capped = run({"bench", "--family", "random-additive", "--runs", "1", "--n",
                                "3", "--m", "4", "--b", "2", "--verify-cap", "2"});
  REQUIRE(capped.code == 0);
  std::istringstream capped_lines(capped.out);
  std::string capped_header, capped_row;
  std::getline(capped_lines, capped_header);
  std::getline(capped_lines, capped_row);
  std::vector<std::string> capped_cells;
  std::istringstream cs(capped_row);
  for (std::string cell; std::getline(cs, cell, ',');) capped_cells.push_back(cell);
  CHECK(capped_cells.at(7).empty());
  CHECK(!capped_cells.at(8).empty());

  // All rows failing means a nonzero exit and per-row diagnostics.
  const CliResult failed = run({"bench", "--family", "lb-general", "--runs", "2"});
  CHECK(failed.code == 1);
  CHECK(failed.err.find("row 0 failed") != std::string::npos);
}

TEST_CASE("environment overrides: worker count and seed stream") {
  const std::vector<std::string> sweep = {"bench", "--family", "random-additive", "--runs",
                                          "4",     "--n",      "3",
                                          "--m",   "4",        "--b",
                                          "2"};
  const CliResult serial = run(sweep);
  REQUIRE(serial.code == 0);
  {
    EnvGuard jobs("PBCORE_JOBS", "3");
    const CliResult pooled = run(sweep);
    REQUIRE(pooled.code == 0);
    std::istringstream lines_a(serial.out), lines_b(pooled.out);
    std::string la, lb;
    while (std::getline(lines_a, la) && std::getline(lines_b, lb)) {
      std::vector<std::string> ca, cb;
      std::istringstream sa(la), sb(lb);
      for (std::string c; std::getline(sa, c, ',');) ca.push_back(c);
      for (std::string c; std::getline(sb, c, ',');) cb.push_back(c);
      REQUIRE(ca.size() == cb.size());
      for (std::size_t k = 0; k < ca.size(); ++k)
        if (k != 6) CHECK(ca[k] == cb[k]);
    }
  }
  {
    EnvGuard bad("PBCORE_JOBS", "zero");
    const std::string inst = write_file("env_goods.json", kTwoGoods);
    const std::string empty = write_file("env_committee.json", "[]");
    const CliResult broken = run({"verify", "--in", inst, "--committee", empty});
    CHECK(broken.code == 1);
    CHECK(broken.err.find("PBCORE_JOBS") != std::string::npos);
  }
  {
    const CliResult base = run({"gen", "random-additive", "--seed", "1"});
    EnvGuard stream("PBCORE_SEED_STREAM", "7");
    const CliResult shifted = run({"gen", "random-additive", "--seed", "1"});
    REQUIRE(shifted.code == 0);
    CHECK(shifted.out != base.out);
    CHECK(run({"gen", "random-additive", "--seed", "1"}).out == shifted.out);
  }
}

TEST_CASE("usage errors and help round out the surface") {
  CHECK(run({}).code == 1);                       // a subcommand is required
  CHECK(run({"frobnicate"}).code == 1);           // unknown subcommand
  CHECK(run({"solve"}).code == 1);                // --in is required
  CHECK(run({"gen", "mystery-family"}).code == 1);
  const CliResult help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("solve") != std::string::npos);
  CHECK(help.out.find("bench") != std::string::npos);
}
