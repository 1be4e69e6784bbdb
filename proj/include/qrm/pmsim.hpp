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

/**
 * @file pmsim.hpp
 * @brief Projective simulability of 4-outcome qubit POVMs.
 *
 * A 4-outcome qubit POVM is a convex combination of projective measurements
 * iff its effects split as M_1 = N_12 + N_13 + N_14, ..., where each pair
 * (i, j) carries PSD operators N_ij^+ and N_ij^- with N_ij^+ + N_ij^- =
 * p_ij * I and the p_ij form a probability distribution. The module solves
 * a robust version: the largest depolarizing visibility t at which
 * t*M^x + (1-t)*Tr[M^x]*I/2 admits such a splitting.
 */

#ifndef QRM_PMSIM_HPP
#define QRM_PMSIM_HPP

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrm/conic.hpp"
#include "qrm/qobj.hpp"

namespace qrm {

/// One pair block of the simulability decomposition: a weight and the
/// two-outcome sub-measurement assigned to outcomes (i, j).
struct PmPair {
  int i = 0, j = 0;
  double weight = 0.0;
  CMatrix effect_i, effect_j;  // sum to weight * I
};

struct VisibilityResult {
  double t_star = 0.0;
  std::vector<PmPair> pairs;  // decomposition at t = t_star
  /// Farkas certificate of infeasibility of the t = 1 system, when t_star < 1.
  std::optional<std::vector<double>> dual_certificate;
};

namespace pmsim_detail {

inline const std::array<std::pair<int, int>, 6> kPairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Builds the pairwise-decomposition constraint system for the depolarized
/// POVM.
/// When `fix_t` is set, t is a constant (feasibility problem); otherwise t is
/// a variable maximized subject to t <= 1.
inline SdpProblem simulability_problem(const Povm &m, std::optional<double> fix_t) {
  SdpProblem prob;
  const CMatrix id = identity(2);

  std::array<std::array<int, 2>, 6> nvar{};
  std::array<int, 6> pvar{};
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kPairs[k];
    const std::string tag = std::to_string(i) + std::to_string(j);
    nvar[k][0] = prob.add_variable("N" + tag + "p", 2);
    nvar[k][1] = prob.add_variable("N" + tag + "m", 2);
    prob.require_psd(nvar[k][0]);
    prob.require_psd(nvar[k][1]);
    pvar[k] = prob.add_variable("p" + tag, 1);
    prob.require_psd(pvar[k]);
  }
  int tvar = -1;
  if (!fix_t) {
    tvar = prob.add_variable("t", 1);
    int uvar = prob.add_variable("u", 1);  // slack: t + u = 1
    prob.require_psd(tvar);
    prob.require_psd(uvar);
    prob.add_equality({{tvar, CMatrix::Identity(1, 1)},
                       {uvar, CMatrix::Identity(1, 1)}},
                      1.0);
    prob.set_objective({{tvar, CMatrix::Identity(1, 1)}}, Sense::kMaximize);
  }

  // Outcome rows: sum over pairs touching x of the matching N equals the
  // depolarized effect t*M^x + (1-t)*Tr[M^x]*I/2.
  for (int x = 0; x < 4; ++x) {
    std::vector<std::pair<int, double>> mat_terms;
    for (int k = 0; k < 6; ++k) {
      if (kPairs[k].first == x) mat_terms.push_back({nvar[k][0], 1.0});
      if (kPairs[k].second == x) mat_terms.push_back({nvar[k][1], 1.0});
    }
    const double trx = m.effects[x].trace().real();
    const CMatrix dir = m.effects[x] - 0.5 * trx * id;  // traceless part
    if (fix_t) {
      prob.add_matrix_equality(mat_terms, {},
                               CMatrix(*fix_t * dir + 0.5 * trx * id));
    } else {
      prob.add_matrix_equality(mat_terms, {{tvar, CMatrix(-dir)}},
                               CMatrix(0.5 * trx * id));
    }
  }

  // Pair rows: N_ij^+ + N_ij^- = p_ij * I.
  for (int k = 0; k < 6; ++k)
    prob.add_matrix_equality({{nvar[k][0], 1.0}, {nvar[k][1], 1.0}},
                             {{pvar[k], CMatrix(-id)}}, CMatrix::Zero(2, 2));

  // Normalization sum p_ij = 1 is implied by the traces of the rows above and
  // is dropped by presolve; stated anyway for clarity of the model.
  {
    std::vector<LinTerm> terms;
    for (int k = 0; k < 6; ++k) terms.push_back({pvar[k], CMatrix::Identity(1, 1)});
    prob.add_equality(std::move(terms), 1.0);
  }
  return prob;
}

}  // namespace pmsim_detail

/// Maximal depolarizing visibility at which the POVM is a convex combination
/// of projective measurements, plus the decomposition and, when t_star < 1,
/// a Farkas certificate of infeasibility of the noiseless system.
inline VisibilityResult pm_visibility(const Povm &m, double tol = 1e-9) {
  if (m.dim != 2 || m.outcomes() != 4)
    throw std::invalid_argument(
        "pm_visibility: expected a qubit POVM with exactly 4 outcomes");

  SdpProblem prob = pmsim_detail::simulability_problem(m, std::nullopt);
  SdpSolution sol = solve_sdp_complex(prob, tol);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("pm_visibility: solver failed");

  VisibilityResult res;
  res.t_star = std::min(1.0, std::max(0.0, sol.values["t"](0, 0).real()));
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = pmsim_detail::kPairs[k];
    const std::string tag = std::to_string(i) + std::to_string(j);
    PmPair pair;
    pair.i = i;
    pair.j = j;
    pair.weight = std::max(0.0, sol.values["p" + tag](0, 0).real());
    pair.effect_i = sol.values["N" + tag + "p"];
    pair.effect_j = sol.values["N" + tag + "m"];
    res.pairs.push_back(std::move(pair));
  }

  if (res.t_star < 1.0 - 1e-7) {
    // Witness infeasibility of the exact (t = 1) system.
    SdpProblem feas = pmsim_detail::simulability_problem(m, 1.0);
    SdpSolution fsol = solve_sdp_complex(feas, tol);
    if (fsol.status == SdpStatus::kInfeasible)
      res.dual_certificate = fsol.infeasibility_certificate;
  }
  return res;
}

/// Splits the pair decomposition of a feasible visibility solution into exact
/// projective measurements, each embedded as a 4-outcome POVM supported on
/// its outcome pair. The weighted mixture reproduces the depolarized POVM.
inline std::vector<std::pair<double, Povm>> extract_pm_decomposition(
    const VisibilityResult &v, double tol = 1e-7) {
  std::vector<std::pair<double, Povm>> out;
  const CMatrix zero = CMatrix::Zero(2, 2);
  const CMatrix id = identity(2);
  auto emit = [&](int i, int j, double w, const CMatrix &fi, const CMatrix &fj) {
    if (w <= 1e-12) return;
    std::vector<CMatrix> eff(4, zero);
    eff[i] = fi;
    eff[j] = fj;
    out.push_back({w, Povm(std::move(eff))});
  };
  for (const PmPair &pair : v.pairs) {
    if (pair.weight <= 1e-10) continue;
    // Normalize the pair to a two-outcome POVM {F, I - F}.
    CMatrix f = pair.effect_i / pair.weight;
    f = 0.5 * (f + dag(f));
    Eigh es = eigh(f);
    double l1 = std::min(1.0, std::max(0.0, es.eigenvalues(0)));
    double l2 = std::min(l1, std::max(0.0, es.eigenvalues(1)));
    CMatrix p = es.eigenvectors.col(0) * dag(CMatrix(es.eigenvectors.col(0)));
    // {F, I-F} = (l1-l2){P, I-P} + l2 {I, 0} + (1-l1) {0, I}.
    emit(pair.i, pair.j, pair.weight * (l1 - l2), p, id - p);
    emit(pair.i, pair.j, pair.weight * l2, id, zero);
    emit(pair.i, pair.j, pair.weight * (1.0 - l1), zero, id);
  }
  // Each emitted component must be projective.
  for (const auto &[w, povm] : out)
    for (const CMatrix &e : povm.effects)
      if ((e * e - e).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error(
            "extract_pm_decomposition: non-projective component beyond tol");
  return out;
}

}  // namespace qrm

#endif  // QRM_PMSIM_HPP
