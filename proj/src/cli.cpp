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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbcore/common.hpp"
#include "pbcore/generators.hpp"
#include "pbcore/iter_round.hpp"
#include "pbcore/model.hpp"
#include "pbcore/verify.hpp"

namespace pbcore {

namespace {

using nlohmann::ordered_json;

// Shifts a seed to the stream selected by PBCORE_SEED_STREAM (if set).
constexpr std::uint64_t kStreamSalt = 0x57ea;

std::string now_utc_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string fmt9(double v) {
  if (!std::isfinite(v)) return v > 0 ? "infinity" : "-infinity";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int env_jobs() {
  const char* v = std::getenv("PBCORE_JOBS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1 || n > 1024)
    throw Error("PBCORE_JOBS must be an integer in [1, 1024]");
  return static_cast<int>(n);
}

std::uint64_t apply_seed_stream(std::uint64_t seed) {
  const char* v = std::getenv("PBCORE_SEED_STREAM");
  if (v == nullptr || *v == '\0') return seed;
  char* end = nullptr;
  const unsigned long long stream = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0')
    throw Error("PBCORE_SEED_STREAM must be a non-negative integer");
  return Rng::derive(seed, {kStreamSalt, static_cast<std::uint64_t>(stream)}).next_u64();
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes to the file when a path is given, else to the stream.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("failed while writing '" + path + "'");
}

// A committee file is a JSON array of candidate ids, or any object with a
// "committee" array of ids -- a SolveReport works as-is.
std::vector<int> parse_committee(const Instance& inst, const std::string& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_text_file(path));
  } catch (const ordered_json::parse_error& e) {
    throw Error("committee file '" + path + "' is not valid JSON: " + std::string(e.what()));
  }
  const ordered_json* list = nullptr;
  if (doc.is_array()) {
    list = &doc;
  } else if (doc.is_object() && doc.contains("committee") && doc.at("committee").is_array()) {
    list = &doc.at("committee");
  } else {
    throw Error(
        "committee file must be a JSON array of candidate ids or an object "
        "with a 'committee' array");
  }
  std::vector<int> members;
  for (const auto& item : *list) {
    if (!item.is_string()) throw Error("committee entries must be candidate id strings");
    const std::string id = item.get<std::string>();
    const std::optional<int> idx = inst.candidate_index(id);
    if (!idx) throw Error("committee names unknown candidate '" + id + "'");
    members.push_back(*idx);
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return members;
}

ordered_json alpha_to_json(double alpha) {
  if (std::isinf(alpha)) return "infinity";
  return alpha;
}

struct SolveOpts {
  std::string in;
  std::string outfile;
  std::string preset = "submodular";
  double omega = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
  std::string profile_name = "practical";
  std::uint64_t seed = 0;
  long long nw_max_iters = 0;
  bool no_timestamp = false;
};

struct VerifyOpts {
  std::string in;
  std::string committee;
  std::string outfile;
  std::string mode = "full";
  bool strict = false;
  double threshold = 1.0;
  int probes = 1000;
  std::uint64_t seed = 0;
};

// Shared by `gen` and `bench`: parameters of the four instance families.
struct FamilyOpts {
  std::string family;
  int gadget_size = 5;
  double alpha_lb = 0.0;
  double z = 0.0;
  int n = 6;
  int m = 10;
  double b = 5.0;
  std::string weight_dist = "uniform";
  double size_min = 1.0;
  double size_max = 1.0;
  int universe = 12;
  double density = 0.3;
  std::uint64_t seed = 0;
  std::string outfile;
};

struct BenchOpts {
  int runs = 10;
  std::uint64_t seed0 = 0;
  std::string preset = "auto";
  int verify_cap = 24;
};

Instance build_family_instance(const FamilyOpts& o, std::uint64_t seed) {
  if (o.family == "lb-general") {
    if (!(o.alpha_lb > 0.0)) throw Error("lb-general needs --alpha-lb > 0");
    return gen_lower_bound(LowerBoundKind::kGeneral, o.gadget_size, o.alpha_lb);
  }
  if (o.family == "lb-submodular")
    return gen_lower_bound(LowerBoundKind::kSubmodular, o.gadget_size, o.z);
  if (o.family == "random-additive") {
    RandomAdditiveParams p;
    p.n = o.n;
    p.m = o.m;
    p.budget = o.b;
    p.dist = parse_weight_dist(o.weight_dist);
    p.size_min = o.size_min;
    p.size_max = o.size_max;
    p.seed = seed;
    return random_additive(p);
  }
  RandomCoverageParams p;  // random-coverage (the flag validator admits no others)
  p.n = o.n;
  p.m = o.m;
  p.universe = o.universe;
  p.density = o.density;
  p.budget = o.b;
  p.seed = seed;
  return random_coverage(p);
}

int cmd_solve(const SolveOpts& o, const DriverParams& params, std::ostream& out,
              std::ostream& err) {
  const Instance inst = load_instance(o.in);
  const SolveReport report = o.preset == "additive" ? solve_additive(inst, params)
                                                    : solve_submodular(inst, params);
  const std::string stamp = o.no_timestamp ? "" : now_utc_iso8601();
  emit(serialize_report(inst, report, stamp), o.outfile, out);
  err << "committee of " << report.committee.size() << " candidate(s), cost "
      << fmt9(report.total_cost) << " of budget " << fmt9(inst.budget) << ", guarantee "
      << fmt9(report.alpha_guarantee) << " (" << report.guarantee_label << ")\n";
  return 0;
}

int cmd_verify(const VerifyOpts& o, std::ostream& out, std::ostream& err) {
  if (o.strict && o.mode != "full")
    throw Error("--strict-additament requires --mode full");
  const Instance inst = load_instance(o.in);
  const std::vector<int> committee = parse_committee(inst, o.committee);
  ordered_json doc;

  if (o.mode == "probe") {
    std::vector<double> x(static_cast<std::size_t>(inst.num_candidates()), 0.0);
    for (int j : committee) x[static_cast<std::size_t>(j)] = 1.0;
    std::vector<int> everyone(static_cast<std::size_t>(inst.num_voters()));
    for (int i = 0; i < inst.num_voters(); ++i) everyone[static_cast<std::size_t>(i)] = i;
    const FractionalCoreReport rep = check_fractional_core(
        inst, x, everyone, inst.budget, o.threshold, o.probes, apply_seed_stream(o.seed));
    doc["mode"] = "probe";
    doc["alpha"] = o.threshold;
    doc["probes"] = rep.probes_run;
    doc["delta"] = rep.delta;
    doc["margin"] = rep.margin;
    doc["samples_per_eval"] = rep.samples_per_eval;
    doc["violation_found"] = rep.violation_found;
    if (rep.violation_found) {
      ordered_json violation;
      violation["probe"] = rep.probe;
      ordered_json ids = ordered_json::array();
      for (int i : rep.S) ids.push_back(inst.voters[static_cast<std::size_t>(i)].id);
      violation["S"] = std::move(ids);
      violation["z"] = rep.z;
      violation["margin"] = rep.margin;
      doc["violation"] = std::move(violation);
    } else {
      doc["violation"] = nullptr;
    }
    emit(doc.dump(2) + "\n", o.outfile, out);
    err << (rep.violation_found
                ? "fractional-core violation found at alpha " + fmt9(o.threshold)
                : "no violation in " + std::to_string(rep.probes_run) +
                      " probes (probing refutes; it never certifies)")
        << "\n";
    return rep.violation_found ? 4 : 0;
  }

  const AdditamentRule rule =
      o.strict ? AdditamentRule::kFromDeviation : AdditamentRule::kAllCandidates;
  const MinAlphaResult result = o.mode == "full"
                                    ? min_alpha(inst, committee, rule, env_jobs())
                                    : min_alpha_profile(inst, committee);
  doc["mode"] = o.mode;
  doc["additament_rule"] = o.strict ? "from-deviation" : "all-candidates";
  doc["min_alpha"] = alpha_to_json(result.min_alpha);
  doc["threshold"] = o.threshold;
  if (result.certificate.has_value()) {
    doc["certificate"] = ordered_json::parse(serialize_certificate(inst, *result.certificate));
  } else {
    doc["certificate"] = nullptr;
  }
  emit(doc.dump(2) + "\n", o.outfile, out);
  err << "min_alpha = " << fmt9(result.min_alpha) << " (threshold " << fmt9(o.threshold)
      << ")\n";
  return result.min_alpha > o.threshold ? 4 : 0;
}

int cmd_gen(const FamilyOpts& o, std::ostream& out, std::ostream& err) {
  const Instance inst = build_family_instance(o, apply_seed_stream(o.seed));
  emit(serialize_instance(inst), o.outfile, out);
  err << "generated " << inst.num_voters() << " voter(s), " << inst.num_candidates()
      << " candidate(s), budget " << fmt9(inst.budget) << "\n";
  return 0;
}

int cmd_bench(const FamilyOpts& fam, const BenchOpts& o, std::ostream& out, std::ostream& err) {
  const bool additive_preset_row =
      o.preset == "additive" || (o.preset == "auto" && fam.family == "random-additive");
  struct Row {
    bool ok = false;
    std::string csv;
    std::string error;
  };
  std::vector<Row> rows(static_cast<std::size_t>(o.runs));

  auto run_row = [&](int index) {
    Row& row = rows[static_cast<std::size_t>(index)];
    const std::uint64_t seed =
        apply_seed_stream(o.seed0 + static_cast<std::uint64_t>(index));
    std::string n_col, m_col;
    try {
      const Instance inst = build_family_instance(fam, seed);
      n_col = std::to_string(inst.num_voters());
      m_col = std::to_string(inst.num_candidates());
      DriverParams params = additive_preset_row ? additive_preset(seed) : submodular_preset(seed);
      const auto t0 = std::chrono::steady_clock::now();
      const SolveReport report = additive_preset_row ? solve_additive(inst, params)
                                                     : solve_submodular(inst, params);
      const auto t1 = std::chrono::steady_clock::now();
      const double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      long long nw_iters = 0;
      long long attempts = 0;
      for (const RoundTrace& trace : report.rounds) {
        nw_iters += trace.nw_iters;
        attempts += trace.attempts;
      }
      std::string alpha_col;  // stays empty when the instance is unverifiable
      if (inst.num_candidates() <= o.verify_cap)
        alpha_col = fmt9(min_alpha(inst, report.committee).min_alpha);
      row.csv = std::to_string(seed) + "," + n_col + "," + m_col + "," +
                std::to_string(report.rounds.size()) + "," + std::to_string(nw_iters) + "," +
                std::to_string(attempts) + "," + fmt9(wall_ms) + "," + alpha_col + "," +
                fmt9(report.alpha_guarantee);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.csv = std::to_string(seed) + "," + n_col + "," + m_col + ",,,,,,";
    }
  };

  const int jobs = std::min(env_jobs(), o.runs);
  if (jobs <= 1) {
    for (int i = 0; i < o.runs; ++i) run_row(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < o.runs; i = next.fetch_add(1)) run_row(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::string csv = "seed,n,m,rounds,nw_iters,round_attempts,wall_ms,min_alpha,guarantee\n";
  int succeeded = 0;
  for (int i = 0; i < o.runs; ++i) {
    const Row& row = rows[static_cast<std::size_t>(i)];
    csv += row.csv + "\n";
    if (row.ok) {
      ++succeeded;
    } else {
      err << "row " << i << " failed: " << row.error << "\n";
    }
  }
  emit(csv, fam.outfile, out);
  err << succeeded << " of " << o.runs << " row(s) succeeded\n";
  return succeeded > 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pbcore: budget-constrained committee selection"};
  app.require_subcommand(1);

  SolveOpts so;
  CLI::App* solve = app.add_subcommand("solve", "Select a committee by iterative rounding");
  solve->add_option("--in", so.in, "Instance JSON file")->required();
  solve->add_option("--out", so.outfile, "Write the report here instead of stdout");
  solve->add_option("--preset", so.preset, "Parameter preset (default submodular)")
      ->check(CLI::IsMember({"submodular", "additive"}));
  CLI::Option* opt_omega =
      solve->add_option("--omega", so.omega, "Per-round budget shrink factor, in (0,1)");
  CLI::Option* opt_gamma = solve->add_option("--gamma", so.gamma, "Satisfaction slack, >= 1");
  CLI::Option* opt_kappa =
      solve->add_option("--kappa", so.kappa, "Fraction of the round budget given to the "
                                             "fractional solve");
  CLI::Option* opt_eps =
      solve->add_option("--eps", so.eps, "Override the instance epsilon, in (0, 1/20)");
  CLI::Option* opt_profile =
      solve->add_option("--profile", so.profile_name, "Search profile (default practical)")
          ->check(CLI::IsMember({"practical", "proof"}));
  solve->add_option("--seed", so.seed, "Root seed for all randomness");
  CLI::Option* opt_nw_iters =
      solve->add_option("--nw-max-iters", so.nw_max_iters, "Iteration cap per local search");
  solve->add_flag("--no-timestamp", so.no_timestamp,
                  "Omit the timestamp so reruns compare byte-identically");

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand("verify", "Measure how far a committee is from the core");
  verify->add_option("--in", vo.in, "Instance JSON file")->required();
  verify
      ->add_option("--committee", vo.committee,
                   "JSON file naming the committee (a solve report works)")
      ->required();
  verify->add_option("--out", vo.outfile, "Write the report here instead of stdout");
  verify
      ->add_option("--mode", vo.mode,
                   "full = exact enumeration, profile = gadget count space, probe = "
                   "randomized fractional-core refutation")
      ->check(CLI::IsMember({"full", "profile", "probe"}));
  verify->add_flag("--strict-additament", vo.strict,
                   "Additament restricted to the deviating set (comparison variant)");
  verify->add_option("--threshold", vo.threshold,
                     "Exit 4 when min_alpha exceeds this (default 1.0)");
  verify->add_option("--probes", vo.probes, "Probe count for --mode probe");
  verify->add_option("--seed", vo.seed, "Seed for --mode probe");

  FamilyOpts go;
  CLI::App* gen = app.add_subcommand("gen", "Emit an instance from a named family");
  gen->add_option("family", go.family, "lb-general | lb-submodular | random-additive | random-coverage")
      ->required()
      ->check(CLI::IsMember({"lb-general", "lb-submodular", "random-additive", "random-coverage"}));
  gen->add_option("--out", go.outfile, "Write the instance here instead of stdout");
  gen->add_option("--gadget-size", go.gadget_size, "Candidates per gadget (lb families)");
  gen->add_option("--alpha-lb", go.alpha_lb, "Utility blow-up of lb-general (required there)");
  gen->add_option("--z", go.z, "Submodular gadget constant in (0,1]; 0 = the canonical value");
  gen->add_option("--n", go.n, "Voters (random families)");
  gen->add_option("--m", go.m, "Candidates (random families)");
  gen->add_option("--b", go.b, "Budget (random families)");
  gen->add_option("--weight-dist", go.weight_dist, "uniform | exponential")
      ->check(CLI::IsMember({"uniform", "exponential"}));
  gen->add_option("--size-min", go.size_min, "Smallest candidate size (random-additive)");
  gen->add_option("--size-max", go.size_max, "Largest candidate size (random-additive)");
  gen->add_option("--universe", go.universe, "Ground elements (random-coverage)");
  gen->add_option("--density", go.density, "Cover probability (random-coverage)");
  gen->add_option("--seed", go.seed, "Seed for the random families");

  FamilyOpts bo;
  BenchOpts bench_opts;
  CLI::App* bench = app.add_subcommand("bench", "Sweep seeds over a family; emit CSV");
  bench->add_option("--family", bo.family, "Instance family to sweep")
      ->required()
      ->check(CLI::IsMember({"lb-general", "lb-submodular", "random-additive", "random-coverage"}));
  bench->add_option("--runs", bench_opts.runs, "Rows to produce (default 10)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed0", bench_opts.seed0, "First seed; row i uses seed0 + i");
  bench->add_option("--preset", bench_opts.preset,
                    "Solver preset; auto = additive for random-additive, else submodular")
      ->check(CLI::IsMember({"auto", "submodular", "additive"}));
  bench->add_option("--verify-cap", bench_opts.verify_cap,
                    "Verify rows with at most this many candidates (default 24)");
  bench->add_option("--out", bo.outfile, "Write the CSV here instead of stdout");
  bench->add_option("--gadget-size", bo.gadget_size, "Candidates per gadget (lb families)");
  bench->add_option("--alpha-lb", bo.alpha_lb, "Utility blow-up of lb-general");
  bench->add_option("--z", bo.z, "Submodular gadget constant; 0 = canonical");
  bench->add_option("--n", bo.n, "Voters (random families)");
  bench->add_option("--m", bo.m, "Candidates (random families)");
  bench->add_option("--b", bo.b, "Budget (random families)");
  bench->add_option("--weight-dist", bo.weight_dist, "uniform | exponential")
      ->check(CLI::IsMember({"uniform", "exponential"}));
  bench->add_option("--size-min", bo.size_min, "Smallest candidate size (random-additive)");
  bench->add_option("--size-max", bo.size_max, "Largest candidate size (random-additive)");
  bench->add_option("--universe", bo.universe, "Ground elements (random-coverage)");
  bench->add_option("--density", bo.density, "Cover probability (random-coverage)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) {
      DriverParams params =
          so.preset == "additive" ? additive_preset() : submodular_preset();
      if (*opt_omega) params.omega = so.omega;
      if (*opt_gamma) params.gamma = so.gamma;
      if (*opt_kappa) params.kappa = so.kappa;
      if (*opt_eps) params.eps = so.eps;
      if (*opt_profile)
        params.profile = so.profile_name == "proof" ? Profile::kProof : Profile::kPractical;
      if (*opt_nw_iters) params.nw_max_iters = so.nw_max_iters;
      params.seed = apply_seed_stream(so.seed);
      return cmd_solve(so, params, out, err);
    }
    if (verify->parsed()) return cmd_verify(vo, out, err);
    if (gen->parsed()) return cmd_gen(go, out, err);
    return cmd_bench(bo, bench_opts, out, err);
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const RoundingCapError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pbcore
