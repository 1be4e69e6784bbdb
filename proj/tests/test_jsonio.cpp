/* Copyright 2026 The qrmeas Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrm/json_io.hpp"
#include "test_util.hpp"

using namespace qrm;
using qrm::testutil::Rng;

TEST_CASE("matrix JSON round-trip") {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    CMatrix m = qrm::testutil::random_ginue(rng, 3);
    Json j = matrix_to_json(m);
    CHECK(j.at("dim").at(0).get<int>() == 3);
    CHECK(j.at("re").size() == 3);
    CMatrix back = matrix_from_json(j);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  }
  // Real-only input: missing "im" means zero imaginary part.
  Json real{{"dim", {1, 2}}, {"re", {{1.0, 2.0}}}};
  CMatrix m = matrix_from_json(real);
  CHECK(m(0, 1) == Complex(2.0, 0.0));
  // Malformed inputs are rejected.
  CHECK_THROWS(matrix_from_json(Json{{"dim", {2, 2}}, {"re", {{1.0}}}}));
  CHECK_THROWS(matrix_from_json(Json::array()));
}

TEST_CASE("vector JSON round-trip") {
  Rng rng(11);
  CVector v = qrm::testutil::random_pure(rng, 4);
  CVector back = vector_from_json(vector_to_json(v));
  CHECK((back - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(vector_from_json(matrix_to_json(identity(2))));
}

TEST_CASE("POVM and state JSON round-trip") {
  Rng rng(13);
  Povm m(qrm::testutil::random_povm(rng, 2, 3), {"a", "b", "c"});
  Json j = povm_to_json(m);
  CHECK(j.at("dim").get<int>() == 2);
  Povm back = povm_from_json(j);
  CHECK(back.labels == m.labels);
  REQUIRE(back.outcomes() == m.outcomes());
  for (size_t x = 0; x < m.outcomes(); ++x)
    CHECK((back.effects[x] - m.effects[x]).cwiseAbs().maxCoeff() == 0.0);
  // Declared dimension mismatches are rejected.
  j["dim"] = 5;
  CHECK_THROWS(povm_from_json(j));

  QState s(qrm::testutil::random_density(rng, 3));
  QState sback = state_from_json(state_to_json(s));
  CHECK((sback.rho - s.rho).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("strategy and report JSON round-trip") {
  Rng rng(17);
  ClassicalStrategy s;
  for (int b = 0; b < 2; ++b) {
    ClassicalBranch br;
    br.weight = 0.5;
    br.phi = qrm::testutil::random_pure(rng, 2);
    br.effects = qrm::testutil::random_povm(rng, 2, 2);
    br.guess = b;
    s.branches.push_back(br);
  }
  ClassicalStrategy back = strategy_from_json(strategy_to_json(s));
  REQUIRE(back.branches.size() == 2);
  for (int b = 0; b < 2; ++b) {
    CHECK(back.branches[b].weight == s.branches[b].weight);
    CHECK(back.branches[b].guess == s.branches[b].guess);
    CHECK((back.branches[b].phi - s.branches[b].phi).cwiseAbs().maxCoeff() ==
          0.0);
  }

  GuessReport rep;
  rep.value = 0.75;
  rep.kind = GuessKind::kExactSdp;
  rep.residuals["completeness"] = 1e-12;
  rep.strategy = s;
  Json j = report_to_json(rep);
  CHECK(j.at("value").get<double>() == 0.75);
  CHECK(j.at("kind").get<std::string>() == "exact_sdp");
  CHECK(j.at("residuals").at("completeness").get<double>() == 1e-12);
  CHECK(j.contains("strategy"));
}

TEST_CASE("visibility and certificate JSON") {
  VisibilityResult v;
  v.t_star = 0.8;
  PmPair p;
  p.i = 0;
  p.j = 1;
  p.weight = 0.5;
  p.effect_i = 0.25 * identity(2);
  p.effect_j = 0.25 * identity(2);
  v.pairs.push_back(p);
  v.dual_certificate = std::vector<double>{1.0, -1.0};
  Json j = visibility_to_json(v);
  CHECK(j.at("t_star").get<double>() == 0.8);
  CHECK(j.at("pairs").size() == 1);
  CHECK(j.at("dual_certificate").size() == 2);

  PcCertificate c;
  c.applicable = true;
  c.certified = false;
  Json jc = certificate_to_json(c);
  CHECK(jc.at("applicable").get<bool>());
  CHECK_FALSE(jc.at("certified").get<bool>());
  CHECK(jc.at("dual_certificate").is_null());
}
