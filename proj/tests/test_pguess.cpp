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

#include <cmath>
#include <vector>

#include "qrm/pguess.hpp"
#include "test_util.hpp"

using namespace qrm;
using qrm::testutil::Rng;

namespace {

Povm computational_basis(Eigen::Index d) {
  std::vector<CMatrix> eff;
  for (Eigen::Index k = 0; k < d; ++k) eff.push_back(projector(basis_ket(d, k)));
  return Povm(std::move(eff));
}

double helstrom(double p0, const CMatrix &r0, double p1, const CMatrix &r1) {
  return 0.5 * (1.0 + trace_norm(CMatrix(p0 * r0 - p1 * r1)));
}

/// Random projective basis measurement.
Povm random_basis(Rng &rng, Eigen::Index d) {
  CMatrix u = qrm::testutil::random_unitary(rng, d);
  std::vector<CMatrix> eff;
  for (Eigen::Index k = 0; k < d; ++k)
    eff.push_back(u.col(k) * dag(CMatrix(u.col(k))));
  return Povm(std::move(eff));
}

/// Random valid classical strategy: product of a random ensemble of a random
/// state with a random decomposition-by-construction of a POVM.
struct RandomInstance {
  QState rho;
  Povm povm;
  ClassicalStrategy strategy;
};

RandomInstance random_strategy_instance(Rng &rng, Eigen::Index d, int n_out,
                                        int n_states, int n_povms) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  RandomInstance inst;

  // State side: random ensemble of pure states.
  RVector pw(n_states);
  for (int i = 0; i < n_states; ++i) pw(i) = u(rng);
  pw /= pw.sum();
  std::vector<CVector> phis;
  CMatrix rho = CMatrix::Zero(d, d);
  for (int i = 0; i < n_states; ++i) {
    phis.push_back(qrm::testutil::random_pure(rng, d));
    rho += pw(i) * projector(phis.back());
  }
  inst.rho = QState(rho);

  // Measurement side: the POVM is defined as the mixture of random branches.
  RVector qw(n_povms);
  for (int j = 0; j < n_povms; ++j) qw(j) = u(rng);
  qw /= qw.sum();
  std::vector<std::vector<CMatrix>> branches;
  std::vector<CMatrix> agg(n_out, CMatrix::Zero(d, d));
  for (int j = 0; j < n_povms; ++j) {
    branches.push_back(qrm::testutil::random_povm(rng, d, n_out));
    for (int x = 0; x < n_out; ++x) agg[x] += qw(j) * branches.back()[x];
  }
  inst.povm = Povm(agg);

  for (int i = 0; i < n_states; ++i)
    for (int j = 0; j < n_povms; ++j) {
      ClassicalBranch br;
      br.weight = pw(i) * qw(j);
      br.phi = phis[i];
      br.effects = branches[j];
      br.guess = static_cast<int>(rng() % n_out);
      inst.strategy.branches.push_back(std::move(br));
    }
  return inst;
}

}  // namespace

TEST_CASE("ensemble discrimination basics") {
  // Orthogonal states are perfectly distinguishable.
  DiscriminationResult orth = discriminate_ensemble(
      {0.5 * projector(CVector(basis_ket(2, 0))),
       0.5 * projector(CVector(basis_ket(2, 1)))});
  CHECK(orth.value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(validate(orth.povm).ok);

  // |0> vs |+>: Helstrom value.
  CVector plus = (basis_ket(2, 0) + basis_ket(2, 1)) / std::sqrt(2.0);
  DiscriminationResult hel = discriminate_ensemble(
      {0.5 * projector(CVector(basis_ket(2, 0))), 0.5 * projector(plus)});
  CHECK(hel.value == doctest::Approx(0.5 + 0.25 * std::sqrt(2.0)).epsilon(1e-8));

  // Single member: trivially guessed.
  Rng rng(2);
  DiscriminationResult single =
      discriminate_ensemble({qrm::testutil::random_density(rng, 3)});
  CHECK(single.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("classical guessing probability for projective measurements") {
  QState mm(0.5 * identity(2));
  Povm comp = computational_basis(2);
  GuessReport rep = pguess_pm_classical(mm, comp);
  CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-8));
  // Witness round-trip.
  REQUIRE(rep.strategy.has_value());
  GuessReport ev = eval_classical_strategy(*rep.strategy, mm, comp);
  CHECK(ev.value == doctest::Approx(rep.value).epsilon(1e-7));

  // Pure |+>: nothing to decompose, value is max_x <phi|Pi^x|phi>.
  CVector plus = (basis_ket(2, 0) + basis_ket(2, 1)) / std::sqrt(2.0);
  GuessReport pure = pguess_pm_classical(QState(projector(plus)), comp);
  CHECK(pure.value == doctest::Approx(0.5).epsilon(1e-8));

  // Non-projective input is rejected.
  Povm flat({0.5 * identity(2), 0.5 * identity(2)});
  CHECK_THROWS(pguess_pm_classical(mm, flat));
}

TEST_CASE("quantum guessing probability for projective measurements") {
  QState mm(0.5 * identity(2));
  Povm comp = computational_basis(2);
  CHECK(pguess_pm_quantum(mm, comp).value == doctest::Approx(1.0).epsilon(1e-8));

  CVector plus = (basis_ket(2, 0) + basis_ket(2, 1)) / std::sqrt(2.0);
  QState pure(projector(plus));
  CHECK(pguess_pm_quantum(pure, comp).value ==
        doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("classical equals quantum for projective measurements (sampled)") {
  Rng rng(19);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index d = 2 + (t % 2);
    QState rho(qrm::testutil::random_density(rng, d));
    Povm pm = random_basis(rng, d);
    const double pc = pguess_pm_classical(rho, pm).value;
    const double pq = pguess_pm_quantum(rho, pm).value;
    CHECK(std::abs(pc - pq) <= 1e-6);
    CHECK(pc >= born(rho, pm).maxCoeff() - 1e-8);
    CHECK(pc <= 1.0 + 1e-8);
  }
}

TEST_CASE("pure-state POVM guessing probability") {
  // Coin POVM: the eavesdropper always knows the outcome.
  QState zero(projector(CVector(basis_ket(2, 0))));
  Povm flat({0.5 * identity(2), 0.5 * identity(2)});
  GuessReport coin = pguess_pure_povm(zero, flat);
  CHECK(coin.value == doctest::Approx(1.0).epsilon(1e-7));
  REQUIRE(coin.strategy.has_value());
  GuessReport rt = eval_classical_strategy(*coin.strategy, zero, flat);
  CHECK(rt.value == doctest::Approx(coin.value).epsilon(1e-8));

  // Extremal projective measurement on |+>: nothing to gain.
  CVector plus = (basis_ket(2, 0) + basis_ket(2, 1)) / std::sqrt(2.0);
  GuessReport ext = pguess_pure_povm(QState(projector(plus)),
                                     computational_basis(2));
  CHECK(ext.value == doctest::Approx(0.5).epsilon(1e-8));

  // Mixed input is rejected.
  CHECK_THROWS(pguess_pure_povm(QState(0.5 * identity(2)), flat));
}

TEST_CASE("strategy evaluation validates constraints") {
  QState mm(0.5 * identity(2));
  Povm comp = computational_basis(2);
  // Eigenbasis strategy: emit |x> and guess x.
  ClassicalStrategy eig;
  for (int x = 0; x < 2; ++x) {
    ClassicalBranch br;
    br.weight = 0.5;
    br.phi = basis_ket(2, x);
    br.effects = comp.effects;
    br.guess = x;
    eig.branches.push_back(br);
  }
  CHECK(eval_classical_strategy(eig, mm, comp).value ==
        doctest::Approx(1.0).epsilon(1e-9));

  // Mismatched aggregate state is rejected, naming the constraint.
  QState wrong(projector(CVector(basis_ket(2, 0))));
  try {
    eval_classical_strategy(eig, wrong, comp);
    CHECK(false);
  } catch (const std::invalid_argument &e) {
    CHECK(std::string(e.what()).find("state") != std::string::npos);
  }
}

TEST_CASE("lift preserves the strategy value") {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    RandomInstance inst = random_strategy_instance(
        rng, 2, 2 + static_cast<int>(rng() % 2), 2, 2);
    GuessReport cl =
        eval_classical_strategy(inst.strategy, inst.rho, inst.povm);
    QuantumStrategy lifted = lift_classical_to_quantum(inst.strategy);
    GuessReport qu = eval_quantum_strategy(lifted, inst.rho, inst.povm, 1e-7);
    CHECK(std::abs(cl.value - qu.value) <= 1e-9);
    for (const auto &[name, r] : qu.residuals) CHECK(r <= 1e-9);
  }
}

TEST_CASE("separable extraction recovers lifted strategies") {
  Rng rng(29);
  for (int t = 0; t < 5; ++t) {
    RandomInstance inst = random_strategy_instance(rng, 2, 2, 2, 2);
    GuessReport cl =
        eval_classical_strategy(inst.strategy, inst.rho, inst.povm);
    QuantumStrategy lifted = lift_classical_to_quantum(inst.strategy);
    GuessReport qu = eval_quantum_strategy(lifted, inst.rho, inst.povm);

    // Post-measurement states of a lift are product by construction:
    // tau^e = sum_{b: guess_b = e} p_b |phi_b><phi_b| (x) |0,b><0,b|.
    const Eigen::Index da = lifted.impl.ancilla_dim;
    const Eigen::Index nb =
        static_cast<Eigen::Index>(inst.strategy.branches.size());
    std::vector<std::vector<ProductDecomposition>> decomps(
        inst.povm.outcomes());
    for (Eigen::Index b = 0; b < nb; ++b) {
      const ClassicalBranch &br = inst.strategy.branches[b];
      ProductDecomposition pd;
      pd.weight = br.weight;
      pd.s_part = br.phi;
      pd.a_part = basis_ket(da, b);  // |0, b> with A1 index 0
      decomps[br.guess].push_back(pd);
    }
    ClassicalStrategy extracted =
        extract_classical_from_separable(lifted, decomps);
    GuessReport re =
        eval_classical_strategy(extracted, inst.rho, inst.povm, 1e-6);
    CHECK(re.value >= qu.value - 1e-8);
  }
}

TEST_CASE("perfect quantum construction") {
  // Bell basis: all effects I/4, value 1.
  const double s = 1.0 / std::sqrt(2.0);
  auto kv = [](int a, int b) {
    return kron_vec(basis_ket(2, a), basis_ket(2, b));
  };
  std::vector<CVector> bell = {s * (kv(0, 0) + kv(1, 1)),
                               s * (kv(0, 0) - kv(1, 1)),
                               s * (kv(0, 1) + kv(1, 0)),
                               s * (kv(0, 1) - kv(1, 0))};
  PerfectConstruction pc = perfect_quantum_construction(bell);
  for (const CMatrix &e : pc.povm.effects)
    CHECK((e - 0.25 * identity(2)).cwiseAbs().maxCoeff() <= 1e-12);
  GuessReport rep = eval_quantum_strategy(pc.strategy, pc.rho, pc.povm, 1e-9);
  CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-9));

  // Computational product basis: rank-one effects, still perfect.
  std::vector<CVector> prod = {kv(0, 0), kv(0, 1), kv(1, 0), kv(1, 1)};
  PerfectConstruction pp = perfect_quantum_construction(prod);
  CHECK(eval_quantum_strategy(pp.strategy, pp.rho, pp.povm, 1e-9).value ==
        doctest::Approx(1.0).epsilon(1e-9));

  // Non-orthonormal input is rejected.
  std::vector<CVector> bad = bell;
  bad[1] = bad[0];
  CHECK_THROWS(perfect_quantum_construction(bad));
}

TEST_CASE("extremal refinement") {
  // The coin {I/2, I/2} refines into projective pieces.
  std::vector<CMatrix> flat{0.5 * identity(2), 0.5 * identity(2)};
  auto refined = refine_extremal(flat);
  CHECK(refined.size() >= 2);
  double wsum = 0.0;
  std::vector<CMatrix> back(2, CMatrix::Zero(2, 2));
  for (const auto &[w, eff] : refined) {
    wsum += w;
    for (int x = 0; x < 2; ++x) back[x] += w * eff[x];
    Povm leaf(eff);
    // Each leaf must be extremal: rank-one (or zero) effects that are
    // linearly independent, or a trivial identity-like POVM.
    ExtremalityResult res = is_extremal_rank_one(leaf);
    if (res.applicable) CHECK(res.extremal);
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
  for (int x = 0; x < 2; ++x)
    CHECK((back[x] - flat[x]).cwiseAbs().maxCoeff() <= 1e-8);

  // An already-projective measurement is untouched.
  auto comp = computational_basis(2).effects;
  CHECK(refine_extremal(comp).size() == 1);
}

TEST_CASE("refinement never decreases the strategy value") {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    RandomInstance inst = random_strategy_instance(rng, 2, 3, 2, 2);
    GuessReport before =
        eval_classical_strategy(inst.strategy, inst.rho, inst.povm);
    ClassicalStrategy refined = refine_strategy(inst.strategy);
    GuessReport after =
        eval_classical_strategy(refined, inst.rho, inst.povm, 1e-6);
    CHECK(after.value >= before.value - 1e-9);
  }
}

TEST_CASE("product-form strategies respect the pure-state SDP bound") {
  Rng rng(37);
  for (int t = 0; t < 5; ++t) {
    const CVector phi = qrm::testutil::random_pure(rng, 2);
    QState rho(projector(phi));
    // POVM defined as a mixture of two random branch POVMs.
    std::uniform_real_distribution<double> u(0.2, 0.8);
    const double q0 = u(rng), q1 = 1.0 - q0;
    auto b0 = qrm::testutil::random_povm(rng, 2, 4);
    auto b1 = qrm::testutil::random_povm(rng, 2, 4);
    std::vector<CMatrix> agg(4);
    for (int x = 0; x < 4; ++x) agg[x] = q0 * b0[x] + q1 * b1[x];
    Povm m(agg);

    // Product strategy: psi = phi_S (x) psi2_{A E2} with psi2 purifying the
    // dilation ancilla state, and a random adversary POVM on E2.
    QuantumStrategy s;
    s.impl = naimark_from_decomposition({{q0, b0}, {q1, b1}});
    CVector psi2 = purify(s.impl.ancilla_state);
    const Eigen::Index de = psi2.size() / s.impl.ancilla_dim;
    s.psi = kron_vec(phi, psi2);
    std::vector<CMatrix> eve =
        qrm::testutil::random_povm(rng, de, 4);
    s.eve_povm = Povm(eve);
    s.product_form = true;

    GuessReport lower = eval_quantum_strategy(s, rho, m, 1e-7);
    GuessReport exact = pguess_pure_povm(rho, m);
    CHECK(lower.value <= exact.value + 1e-6);
  }
}

TEST_CASE("extremality shortcut for rank-one extremal POVMs") {
  Rng rng(41);
  for (int t = 0; t < 5; ++t) {
    // Random rank-one 4-outcome qubit POVM via a random dilation basis:
    // effects a_x |v_x><v_x| from the columns of a random 4x2 isometry block
    // structure; equivalently M^x = W_x^dag W_x with rows of a unitary.
    CMatrix u = qrm::testutil::random_unitary(rng, 4);
    std::vector<CMatrix> eff;
    for (int x = 0; x < 4; ++x) {
      CMatrix row = u.block(x, 0, 1, 2);  // 1 x 2
      eff.push_back(dag(row) * row);
    }
    Povm m(eff);
    REQUIRE(validate(m).ok);
    ExtremalityResult res = is_extremal_rank_one(m);
    if (!(res.applicable && res.extremal)) continue;
    const CVector phi = qrm::testutil::random_pure(rng, 2);
    QState rho(projector(phi));
    const double direct = born(rho, m).maxCoeff();
    const double sdp = pguess_pure_povm(rho, m).value;
    CHECK(std::abs(sdp - direct) <= 1e-8);
  }
}

TEST_CASE("non-simulability certificate") {
  // Projective measurement: inconclusive (visibility 1).
  Povm comp = computational_basis(2);
  PcCertificate incon = certify_pc_below_one(comp);
  CHECK(incon.applicable);
  CHECK_FALSE(incon.certified);
  CHECK(incon.t_star >= 1.0 - 1e-7);

  // Tetrahedral POVM: certified with a dual witness.
  CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<std::array<double, 3>> axes = {
      {s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  std::vector<CMatrix> eff;
  for (const auto &n : axes)
    eff.push_back(0.25 * (identity(2) + n[0] * sx + n[1] * sy + n[2] * sz));
  PcCertificate cert = certify_pc_below_one(Povm(eff));
  CHECK(cert.applicable);
  CHECK(cert.certified);
  CHECK(cert.t_star < 1.0 - 1e-4);
  CHECK(cert.dual_certificate.has_value());
}
