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
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "pbcore/model.hpp"
#include "pbcore/nw_search.hpp"

using namespace pbcore;
using namespace pbcore_tests;

namespace {

// Test-local re-implementation of the ratio conventions, used to re-check
// certificates from first principles.
double ratio(double value, double denom) {
  if (value <= 0.0) return 0.0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return value / denom;
}

// Re-checks every inequality a certificate claims: the coalition affords T,
// and each member beats alpha against the committee under every additament.
void recheck_certificate(const Instance& inst, const std::vector<int>& committee,
                         const DeviationCertificate& cert) {
  const int m = inst.num_candidates();
  CHECK(cert.cost_T <= cert.endowment + 1e-9);
  CHECK(cert.cost_T == doctest::Approx(inst.cost_of(cert.blocking_T)).epsilon(1e-12));
  const Mask T = mask_from_members(m, cert.blocking_T);
  Mask with_additament = mask_from_members(m, committee);
  for (int i : cert.blocking_S) {
    const UtilityOracle& oracle = inst.voters[i].oracle;
    const double at_T = oracle.value(T);
    double denom = 0.0;
    for (int q = 0; q < m; ++q) {
      const std::uint8_t saved = with_additament[q];
      with_additament[q] = 1;
      denom = std::max(denom, oracle.value(with_additament));
      with_additament[q] = saved;
    }
    CHECK(ratio(at_T, denom) >= cert.alpha_witnessed * (1 - 1e-12) - 1e-9);
  }
}

Instance two_goods(double b) {
  return load_instance_from_json_text(
      "{\"budget\": " + std::to_string(b) + R"(,
    "candidates": [{"id": "c1", "size": 1}, {"id": "c2", "size": 1}],
    "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"c1": 10, "c2": 9}}}]
  })");
}

}  // namespace

TEST_CASE("an empty committee can owe a factor equal to the best bundle") {
  // Single voter, both goods affordable together. The committee's defense is
  // the best singleton (1 after normalization); the deviation takes both
  // goods, worth 1.9.
  Instance inst = two_goods(2.0);
  const MinAlphaResult result = min_alpha(inst, {});
  CHECK(result.min_alpha == doctest::Approx(1.9).epsilon(1e-12));
  REQUIRE(result.certificate.has_value());
  const DeviationCertificate& cert = *result.certificate;
  CHECK(cert.blocking_T == std::vector<int>{0, 1});
  CHECK(cert.blocking_S == std::vector<int>{0});
  CHECK(cert.cost_T == doctest::Approx(2.0));
  CHECK(cert.endowment == doctest::Approx(2.0));
  recheck_certificate(inst, {}, cert);

  // With both goods already selected no deviation helps.
  const MinAlphaResult whole = min_alpha(inst, {0, 1});
  CHECK(whole.min_alpha <= 1.0 + 1e-12);
  CHECK(!whole.certificate.has_value());
}

TEST_CASE("coalition size is the exact ceiling of the endowment requirement") {
  // Four voters, b = 2: a unit-cost deviation needs exactly ceil(4*1/2) = 2
  // backers, which the two c1-lovers provide (ratio 1 each). The 1.2-cost
  // alternative would need 3 backers and only has 2.
  Instance inst = load_instance_from_json_text(R"({
    "budget": 2,
    "candidates": [{"id": "c1", "size": 1}, {"id": "c2", "size": 1.2}],
    "voters": [
      {"id": "v1", "utility": {"type": "additive", "weights": {"c1": 1}}},
      {"id": "v2", "utility": {"type": "additive", "weights": {"c1": 1}}},
      {"id": "v3", "utility": {"type": "additive", "weights": {"c2": 1}}},
      {"id": "v4", "utility": {"type": "additive", "weights": {"c2": 1}}}
    ]
  })");
  const MinAlphaResult result = min_alpha(inst, {});
  CHECK(result.min_alpha == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!result.certificate.has_value());  // only returned above 1
}

TEST_CASE("the full committee is always at least a 1-core") {
  for (Instance inst : {coverage3(), cyclic_additive3(), gadget10("gadget_submodular", "\"z\": 0.7")}) {
    std::vector<int> everything(inst.num_candidates());
    for (int j = 0; j < inst.num_candidates(); ++j) everything[j] = j;
    CHECK(min_alpha(inst, everything).min_alpha <= 1.0 + 1e-12);
  }
}

TEST_CASE("growing the committee never increases min_alpha") {
  for (Instance inst : {cyclic_additive3(), coverage3()}) {
    std::vector<int> committee;
    double previous = std::numeric_limits<double>::infinity();
    for (int j = -1; j < inst.num_candidates(); ++j) {
      if (j >= 0) committee.push_back(j);
      const double alpha = min_alpha(inst, committee).min_alpha;
      CHECK(alpha <= previous + 1e-9);
      previous = alpha;
    }
  }
}

TEST_CASE("the restrictive additament rule is blind to outside defenses") {
  // c1 dominates but costs the whole budget; the committee picked it. Under
  // the liberal rule every deviation is measured against u(O + best q); the
  // restrictive rule lets T = O itself stand at ratio 1.
  Instance inst = load_instance_from_json_text(R"({
    "budget": 2,
    "candidates": [{"id": "c1", "size": 2}, {"id": "c2", "size": 2}, {"id": "c3", "size": 1}],
    "voters": [{"id": "v1", "utility": {"type": "additive",
      "weights": {"c1": 100, "c2": 60, "c3": 55}}}]
  })");
  const MinAlphaResult liberal = min_alpha(inst, {0}, AdditamentRule::kAllCandidates);
  // Best defense: u({c1, c2}) capped by cost... every q: max u(O + q) = 1.6.
  // Deviations: {c1} -> 1/1.6; {c2} -> 0.6/1.6; {c3} -> 0.55/1.6.
  CHECK(liberal.min_alpha == doctest::Approx(1.0 / 1.6).epsilon(1e-12));
  const MinAlphaResult strict = min_alpha(inst, {0}, AdditamentRule::kFromDeviation);
  CHECK(strict.min_alpha == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a committee that cannot complete any gadget is infinitely blocked") {
  Instance inst = gen_lower_bound(LowerBoundKind::kGeneral, 2, 4.0);
  const MinAlphaResult result = min_alpha(inst, {});
  CHECK(std::isinf(result.min_alpha));
  REQUIRE(result.certificate.has_value());
  CHECK(std::isinf(result.certificate->alpha_witnessed));
  recheck_certificate(inst, {}, *result.certificate);
  const std::string json = serialize_certificate(inst, *result.certificate);
  CHECK(json.find("\"infinity\"") != std::string::npos);
}

TEST_CASE("profile enumeration matches the exact verifier on gadget instances") {
  const Instance submodular = gen_lower_bound(LowerBoundKind::kSubmodular, 2, 0.0);
  const Instance general = gen_lower_bound(LowerBoundKind::kGeneral, 2, 5.0);
  const std::vector<std::vector<int>> committees = {
      {}, {0, 1, 2, 3}, {0, 2, 4, 6, 8, 10}, {0, 1, 2, 3, 4, 5}};
  for (const Instance* inst : {&submodular, &general}) {
    for (const std::vector<int>& committee : committees) {
      const MinAlphaResult full = min_alpha(*inst, committee);
      const MinAlphaResult profile = min_alpha_profile(*inst, committee);
      CHECK(full.min_alpha == profile.min_alpha);  // exactly: same oracle arithmetic
      CHECK(full.certificate.has_value() == profile.certificate.has_value());
      if (full.certificate.has_value())
        recheck_certificate(*inst, committee, *profile.certificate);
    }
  }
  // The single-voter gadget fixture partitions its candidates too.
  Instance tiny = gadget10("gadget_submodular", "\"z\": 0.7");
  CHECK(min_alpha_profile(tiny, {0, 1}).min_alpha == min_alpha(tiny, {0, 1}).min_alpha);
}

TEST_CASE("lower-bound generators emit the canonical hard families") {
  const Instance ex2 = gen_lower_bound(LowerBoundKind::kSubmodular);
  CHECK(ex2.num_voters() == 6);
  CHECK(ex2.num_candidates() == 30);
  CHECK(ex2.budget == doctest::Approx(15.0));
  CHECK(ex2.candidates[0].id == "g1c1");
  CHECK(ex2.candidates[29].id == "g6c5");
  const double z_star = (std::sqrt(689.0) - 17.0) / 10.0;
  for (const Voter& voter : ex2.voters) {
    CHECK(voter.oracle.kind() == OracleKind::kGadgetSubmodular);
    CHECK(voter.oracle.gadget_param() == doctest::Approx(z_star).epsilon(1e-12));
    CHECK(voter.oracle.gadget_favorite().size() == 5);
    CHECK(voter.oracle.gadget_second().size() == 5);
  }
  // Voter 1 favors gadget 1 and seconds gadget 2.
  CHECK(ex2.voters[0].oracle.gadget_favorite().front() == 0);
  CHECK(ex2.voters[0].oracle.gadget_second().front() == 5);
  // Voter 6 seconds gadget 4 (the cycles are (1 2 3) and (4 5 6)).
  CHECK(ex2.voters[5].oracle.gadget_second().front() == 15);

  const Instance ex1 = gen_lower_bound(LowerBoundKind::kGeneral, 2, 1000.0);
  CHECK(ex1.num_candidates() == 12);
  CHECK(ex1.budget == doctest::Approx(6.0));
  CHECK(ex1.voters[0].oracle.kind() == OracleKind::kGadgetGeneral);
  CHECK(ex1.voters[0].oracle.gadget_param() == 1000.0);

  // Byte-identical emission.
  CHECK(serialize_instance(gen_lower_bound(LowerBoundKind::kSubmodular)) ==
        serialize_instance(gen_lower_bound(LowerBoundKind::kSubmodular)));

  CHECK_THROWS_AS(gen_lower_bound(LowerBoundKind::kSubmodular, 0), Error);
  CHECK_THROWS_AS(gen_lower_bound(LowerBoundKind::kGeneral, 5, 0.0), Error);
  CHECK_THROWS_AS(gen_lower_bound(LowerBoundKind::kSubmodular, 5, 1.5), Error);
}

TEST_CASE("enumeration guards explain their limits") {
  const Instance big = gen_lower_bound(LowerBoundKind::kSubmodular);  // m = 30
  CHECK_THROWS_WITH_AS(min_alpha(big, {}), doctest::Contains("24"), Error);
  CHECK_THROWS_WITH_AS(min_alpha_profile(cyclic_additive3(), {}), doctest::Contains("gadget"),
                       Error);
  Instance heavy = load_instance_from_json_text(R"({
    "budget": 4,
    "candidates": [{"id": "c1", "size": 2}, {"id": "c2", "size": 1}],
    "voters": [{"id": "v1", "utility": {"type": "gadget_general", "alpha_lb": 2,
      "favorite": ["c1"], "second": ["c2"]}}]
  })");
  CHECK_THROWS_WITH_AS(min_alpha_profile(heavy, {}), doctest::Contains("unit"), Error);
  CHECK_THROWS_AS(min_alpha(two_goods(2.0), {5}), Error);  // unknown candidate index
}

TEST_CASE("sharded verification is identical to sequential") {
  Instance gadget = gadget10("gadget_submodular", "\"z\": 0.7");
  for (const std::vector<int>& committee :
       {std::vector<int>{}, std::vector<int>{0, 1, 2}, std::vector<int>{0, 5}}) {
    const MinAlphaResult one = min_alpha(gadget, committee, AdditamentRule::kAllCandidates, 1);
    const MinAlphaResult four = min_alpha(gadget, committee, AdditamentRule::kAllCandidates, 4);
    CHECK(one.min_alpha == four.min_alpha);
    CHECK(one.certificate.has_value() == four.certificate.has_value());
    if (one.certificate.has_value()) {
      CHECK(one.certificate->blocking_T == four.certificate->blocking_T);
      CHECK(one.certificate->blocking_S == four.certificate->blocking_S);
    }
  }
}

TEST_CASE("fractional-core probing refutes and respects soundness") {
  Instance inst = cyclic_additive3();
  const int m = inst.num_candidates();
  const std::vector<int> everyone = all_voters(inst);

  // An unattainable multiplier is never "refuted".
  std::vector<double> half(m, 0.5);
  const FractionalCoreReport calm =
      check_fractional_core(inst, half, everyone, inst.budget, 1e6, 100, 11);
  CHECK(!calm.violation_found);
  CHECK(calm.probes_run == 100);
  CHECK(calm.margin == 0.0);  // additive: closed-form values

  // Everything beats the zero allocation at alpha = 1.
  std::vector<double> zero(m, 0.0);
  const FractionalCoreReport hot =
      check_fractional_core(inst, zero, everyone, inst.budget, 1.0, 100, 11);
  CHECK(hot.violation_found);
  CHECK(hot.probe == 0);
  REQUIRE(!hot.S.empty());
  // The violating deviation respects its coalition's endowment.
  double cost = 0.0;
  for (int j = 0; j < m; ++j) cost += inst.size_of(j) * hot.z[j];
  CHECK(cost <= static_cast<double>(hot.S.size()) / everyone.size() * inst.budget + 1e-9);

  CHECK_THROWS_AS(check_fractional_core(inst, half, everyone, inst.budget, 1.0, 0, 1), Error);
  CHECK_THROWS_AS(check_fractional_core(inst, half, {}, inst.budget, 1.0, 5, 1), Error);
}

TEST_CASE("probing stays fast on large non-additive instances via range-aware sampling") {
  // 30 candidates puts the gadget oracles on the sampled route, where the
  // generic worst-case Hoeffding derivation would demand billions of samples
  // per evaluation; the probe path must instead size its samples from the
  // true utility range and record the accuracy it bought.
  const Instance inst = gen_lower_bound(LowerBoundKind::kSubmodular);
  REQUIRE(inst.num_candidates() == 30);
  const std::vector<int> everyone = all_voters(inst);
  std::vector<double> zero(static_cast<std::size_t>(inst.num_candidates()), 0.0);

  const FractionalCoreReport hot =
      check_fractional_core(inst, zero, everyone, inst.budget, 1.0, 60, 5);
  CHECK(hot.delta > 0.0);
  CHECK(hot.margin >= 2.0 * hot.delta);
  // Submodular gadget utilities never exceed 1 + z < 2, so the range-aware
  // count stays tiny compared to the worst-case derivation.
  CHECK(hot.samples_per_eval > 100);
  CHECK(hot.samples_per_eval < 100000);
  // A full gadget is worth 1.0 to its favorite voter while the empty
  // committee is worth 0, far beyond the recorded margin: refutable.
  CHECK(hot.violation_found);

  const FractionalCoreReport calm =
      check_fractional_core(inst, zero, everyone, inst.budget, 1e6, 60, 5);
  CHECK(!calm.violation_found);
  CHECK(calm.probes_run == 60);
  CHECK(calm.margin >= (1.0 + 1e6) * calm.delta - 1e-9);
}

TEST_CASE("a local optimum of the Nash program survives a long probe sweep") {
  Instance inst = cyclic_additive3();
  const std::vector<int> everyone = all_voters(inst);
  NwParams params;
  params.record_trace = false;
  const NwResult result = nw_local_search(inst, everyone, inst.budget, params);
  REQUIRE(result.converged);
  const double eps = inst.epsilon;
  const double alpha = 2.0 * (1.0 + 2.0 * eps) / (1.0 - 2.0 * eps);
  const FractionalCoreReport sweep =
      check_fractional_core(inst, result.alloc.x, everyone, inst.budget, alpha, 10000, 77);
  CHECK(!sweep.violation_found);
  CHECK(sweep.probes_run == 10000);
}

TEST_CASE("certificates from varied committees re-verify from first principles") {
  const Instance gs2 = gen_lower_bound(LowerBoundKind::kSubmodular, 2, 0.0);
  const Instance goods = two_goods(2.0);
  struct Case {
    const Instance* inst;
    std::vector<int> committee;
  };
  const std::vector<Case> cases = {
      {&gs2, {}},          {&gs2, {0, 1}},        {&gs2, {0, 2, 4, 6}},
      {&goods, {}},        {&goods, {1}},         {&gs2, {0, 1, 2, 3, 4, 5}},
  };
  for (const Case& c : cases) {
    const MinAlphaResult result = min_alpha(*c.inst, c.committee);
    CHECK((result.min_alpha > 1.0) == result.certificate.has_value());
    if (result.certificate.has_value())
      recheck_certificate(*c.inst, c.committee, *result.certificate);
  }
}
