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
 * @file pguess.hpp
 * @brief Eavesdropper guessing probabilities for noisy measurements on noisy
 * states.
 *
 * Two side-information models are covered. With classical side information
 * the eavesdropper holds the label of a convex decomposition of the state
 * and/or measurement; with quantum side information she holds a purifying
 * system measured after the fact. Exact SDPs are provided for the two
 * regimes where they are known to be tight (projective measurement on a
 * mixed state; arbitrary POVM on a pure state), together with strategy
 * evaluation (lower bounds), a constructive lift from classical to quantum
 * strategies, extraction of classical strategies from separable
 * post-measurement data, the perfect-for-quantum construction from an
 * entangled basis, and a certificate that the classical guessing
 * probability is below one based on projective non-simulability.
 */

#ifndef QRM_PGUESS_HPP
#define QRM_PGUESS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrm/conic.hpp"
#include "qrm/pmsim.hpp"
#include "qrm/qobj.hpp"

namespace qrm {

/// One branch of a classical eavesdropping strategy: with probability
/// `weight` the source emits |phi> and the device measures the sub-POVM
/// `effects`; the eavesdropper announces `guess`.
struct ClassicalBranch {
  double weight = 0.0;
  CVector phi;
  std::vector<CMatrix> effects;
  int guess = 0;
};

struct ClassicalStrategy {
  std::vector<ClassicalBranch> branches;
};

/// Quantum eavesdropping strategy: a projective implementation of the POVM,
/// a global pure state on system (x) ancilla (x) adversary, and the
/// adversary POVM whose outcome x doubles as the announced guess.
struct QuantumStrategy {
  ProjImpl impl;
  CVector psi;    // on S (x) A (x) E
  Povm eve_povm;  // on E; effect index = guessed outcome
  bool product_form = false;
};

enum class GuessKind { kExactSdp, kStrategyLowerBound, kCertificate };

struct GuessReport {
  double value = 0.0;
  GuessKind kind = GuessKind::kExactSdp;
  std::map<std::string, double> residuals;
  std::optional<ClassicalStrategy> strategy;  // witness when available
};

struct DiscriminationResult {
  double value = 0.0;
  Povm povm;
};

/// Minimum-error discrimination of subnormalized states tau^x: maximizes
/// sum_x Tr[M^x tau^x] over POVMs {M^x}. The input weights are carried by
/// the traces of the tau^x.
inline DiscriminationResult discriminate_ensemble(
    const std::vector<CMatrix> &taus, double tol = default_solver_tol()) {
  if (taus.empty())
    throw std::invalid_argument("discriminate_ensemble: empty ensemble");
  const Eigen::Index d = taus.front().rows();
  for (const CMatrix &t : taus)
    if (t.rows() != d || t.cols() != d)
      throw std::invalid_argument("discriminate_ensemble: dimension mismatch");

  SdpProblem prob;
  std::vector<int> vars;
  std::vector<std::pair<int, double>> sum_terms;
  std::vector<LinTerm> obj;
  for (size_t x = 0; x < taus.size(); ++x) {
    int v = prob.add_variable("M" + std::to_string(x), d);
    prob.require_psd(v);
    vars.push_back(v);
    sum_terms.push_back({v, 1.0});
    obj.push_back({v, CMatrix(0.5 * (taus[x] + dag(taus[x])))});
  }
  prob.add_matrix_equality(sum_terms, {}, identity(d));
  prob.set_objective(std::move(obj), Sense::kMaximize);

  SdpSolution sol = solve_sdp_complex(prob, tol);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("discriminate_ensemble: solver failed");

  DiscriminationResult res;
  res.value = sol.primal_objective;
  std::vector<CMatrix> eff;
  for (size_t x = 0; x < taus.size(); ++x)
    eff.push_back(sol.values["M" + std::to_string(x)]);
  res.povm = Povm(std::move(eff));
  return res;
}

inline DiscriminationResult discriminate_ensemble(
    const Ensemble &e, double tol = default_solver_tol()) {
  std::vector<CMatrix> taus;
  for (const auto &[w, s] : e.members) taus.push_back(w * s.rho);
  return discriminate_ensemble(taus, tol);
}

namespace pguess_detail {

inline bool is_projective(const Povm &m, double tol) {
  for (const CMatrix &e : m.effects)
    if ((e * e - e).cwiseAbs().maxCoeff() > tol) return false;
  for (size_t x = 0; x < m.effects.size(); ++x)
    for (size_t y = x + 1; y < m.effects.size(); ++y)
      if ((m.effects[x] * m.effects[y]).cwiseAbs().maxCoeff() > tol)
        return false;
  return true;
}

inline CVector pure_vector(const QState &s, double tol) {
  Eigh es = eigh(s.rho);
  if (es.eigenvalues(0) < 1.0 - tol)
    throw std::invalid_argument("expected a pure state");
  return es.eigenvectors.col(0);
}

inline double born_floor(const QState &rho, const Povm &m) {
  return born(rho, m).maxCoeff();
}

/// Orthonormal basis (columns) of the support of a PSD matrix. Restricting
/// an SDP to supports restores strict feasibility when the right-hand sides
/// are rank deficient (facial reduction).
inline CMatrix support_basis(const CMatrix &h, double tol = 1e-11) {
  Eigh es = eigh(h);
  Eigen::Index r = 0;
  while (r < es.eigenvalues.size() && es.eigenvalues(r) > tol) ++r;
  return es.eigenvectors.leftCols(r);
}

/// Orthogonal Hermitian operator basis of the d x d matrices.
inline std::vector<CMatrix> hermitian_basis(Eigen::Index d) {
  std::vector<CMatrix> basis;
  for (Eigen::Index i = 0; i < d; ++i) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, i) = 1.0;
    basis.push_back(e);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      CMatrix er = CMatrix::Zero(d, d), ei = CMatrix::Zero(d, d);
      er(i, j) = er(j, i) = 1.0;
      ei(i, j) = Complex(0, 1);
      ei(j, i) = Complex(0, -1);
      basis.push_back(er);
      basis.push_back(ei);
    }
  }
  return basis;
}

}  // namespace pguess_detail

/// Classical guessing probability for a projective measurement on a mixed
/// state: max sum_e Tr[Pi^e sigma_e] over subnormalized sigma_e >= 0 with
/// sum_e sigma_e = rho. The witness is the optimal ensemble, each member
/// carrying the outcome the eavesdropper guesses.
inline GuessReport pguess_pm_classical(const QState &rho, const Povm &pm,
                                       double tol = default_solver_tol()) {
  if (!pguess_detail::is_projective(pm, 1e-7))
    throw std::invalid_argument(
        "pguess_pm_classical: measurement is not projective; evaluate an "
        "explicit strategy instead");
  // Facial reduction: sigma_e >= 0 with sum_e sigma_e = rho forces every
  // sigma_e onto the support of rho, so solve there (restores strict
  // feasibility when rho is rank deficient).
  const CMatrix v = pguess_detail::support_basis(rho.rho);
  const Eigen::Index r = v.cols();
  SdpProblem prob;
  std::vector<std::pair<int, double>> sum_terms;
  std::vector<LinTerm> obj;
  for (size_t e = 0; e < pm.effects.size(); ++e) {
    int var = prob.add_variable("sigma" + std::to_string(e), r);
    prob.require_psd(var);
    sum_terms.push_back({var, 1.0});
    obj.push_back({var, CMatrix(dag(v) * pm.effects[e] * v)});
  }
  prob.add_matrix_equality(sum_terms, {}, CMatrix(dag(v) * rho.rho * v));
  prob.set_objective(std::move(obj), Sense::kMaximize);

  SdpSolution sol = solve_sdp_complex(prob, tol);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("pguess_pm_classical: solver failed");

  GuessReport rep;
  rep.value = sol.primal_objective;
  rep.kind = GuessKind::kExactSdp;
  rep.residuals["duality_gap"] = sol.gap;

  // Decode the witness: spectral decomposition of each sigma_e gives pure
  // members; the measurement itself is not decomposed.
  ClassicalStrategy strat;
  for (size_t e = 0; e < pm.effects.size(); ++e) {
    Eigh es = eigh(sol.values["sigma" + std::to_string(e)]);
    for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
      if (es.eigenvalues(k) <= 1e-12) continue;
      ClassicalBranch br;
      br.weight = es.eigenvalues(k);
      br.phi = v * es.eigenvectors.col(k);
      br.effects = pm.effects;
      br.guess = static_cast<int>(e);
      strat.branches.push_back(std::move(br));
    }
  }
  rep.strategy = std::move(strat);
  return rep;
}

/// Quantum guessing probability for a projective measurement on a mixed
/// state: purify, steer the purifying system by the measurement, and solve
/// the induced state-discrimination SDP.
inline GuessReport pguess_pm_quantum(const QState &rho, const Povm &pm,
                                     double tol = default_solver_tol()) {
  if (!pguess_detail::is_projective(pm, 1e-7))
    throw std::invalid_argument("pguess_pm_quantum: measurement is not projective");
  CVector psi = purify(rho);
  const Eigen::Index de = psi.size() / rho.dim;
  std::vector<CMatrix> taus;
  const CMatrix full = projector(psi);
  for (const CMatrix &eff : pm.effects)
    taus.push_back(partial_trace(CMatrix(kron(eff, identity(de)) * full),
                                 {rho.dim, de}, {0}));
  DiscriminationResult disc = discriminate_ensemble(taus, tol);
  GuessReport rep;
  rep.value = disc.value;
  rep.kind = GuessKind::kExactSdp;
  return rep;
}

/// Classical (equivalently quantum) guessing probability for an arbitrary
/// POVM measured on a pure state: max sum_e <phi|M^{e,e}|phi> over
/// sub-effects M^{x,e} >= 0 with sum_e M^{x,e} = M^x and
/// sum_x M^{x,e} = q_e * I. The witness decodes into a ClassicalStrategy.
inline GuessReport pguess_pure_povm(const QState &phi_state, const Povm &m,
                                    double tol = default_solver_tol()) {
  const CVector phi = pguess_detail::pure_vector(phi_state, 1e-7);
  const Eigen::Index d = m.dim;
  const int n = static_cast<int>(m.outcomes());

  // Facial reduction: M^{x,e} >= 0 with sum_e M^{x,e} = M^x confines each
  // sub-effect to the support of M^x, so parametrize it there. A strictly
  // feasible point (S^{x,e} = supp(M^x)/n, q_e = 1/n) then always exists.
  std::vector<CMatrix> supp(n);
  for (int x = 0; x < n; ++x)
    supp[x] = pguess_detail::support_basis(m.effects[x]);

  SdpProblem prob;
  std::vector<std::vector<int>> sub(n, std::vector<int>(n, -1));
  std::vector<int> qvar(n);
  for (int x = 0; x < n; ++x) {
    if (supp[x].cols() == 0) continue;  // zero effect: no sub-effects
    for (int e = 0; e < n; ++e) {
      sub[x][e] = prob.add_variable(
          "M_" + std::to_string(x) + "_" + std::to_string(e), supp[x].cols());
      prob.require_psd(sub[x][e]);
    }
  }
  for (int e = 0; e < n; ++e) {
    qvar[e] = prob.add_variable("q" + std::to_string(e), 1);
    prob.require_psd(qvar[e]);
  }
  for (int x = 0; x < n; ++x) {
    if (supp[x].cols() == 0) continue;
    std::vector<std::pair<int, double>> terms;
    for (int e = 0; e < n; ++e) terms.push_back({sub[x][e], 1.0});
    prob.add_matrix_equality(terms, {},
                             CMatrix(dag(supp[x]) * m.effects[x] * supp[x]));
  }
  // sum_x V_x S^{x,e} V_x^dag = q_e I, expanded over an operator basis of
  // the full space because each variable lives in its own support basis.
  for (int e = 0; e < n; ++e) {
    for (const CMatrix &dir : pguess_detail::hermitian_basis(d)) {
      std::vector<LinTerm> terms;
      for (int x = 0; x < n; ++x) {
        if (sub[x][e] < 0) continue;
        terms.push_back({sub[x][e], CMatrix(dag(supp[x]) * dir * supp[x])});
      }
      terms.push_back({qvar[e], CMatrix(-dir.trace().real() *
                                        CMatrix::Identity(1, 1))});
      prob.add_equality(std::move(terms), 0.0);
    }
  }
  const CMatrix phiproj = projector(phi);
  std::vector<LinTerm> obj;
  for (int e = 0; e < n; ++e) {
    if (sub[e][e] < 0) continue;
    obj.push_back({sub[e][e], CMatrix(dag(supp[e]) * phiproj * supp[e])});
  }
  prob.set_objective(std::move(obj), Sense::kMaximize);

  SdpSolution sol = solve_sdp_complex(prob, tol);
  if (sol.status != SdpStatus::kOptimal)
    throw std::runtime_error("pguess_pure_povm: solver failed");

  GuessReport rep;
  rep.value = sol.primal_objective;
  rep.kind = GuessKind::kExactSdp;
  rep.residuals["duality_gap"] = sol.gap;

  ClassicalStrategy strat;
  for (int e = 0; e < n; ++e) {
    const double qe = sol.values["q" + std::to_string(e)](0, 0).real();
    if (qe <= 1e-10) continue;
    ClassicalBranch br;
    br.weight = qe;
    br.phi = phi;
    for (int x = 0; x < n; ++x) {
      if (sub[x][e] < 0) {
        br.effects.push_back(CMatrix::Zero(d, d));
        continue;
      }
      CMatrix s = sol.values["M_" + std::to_string(x) + "_" +
                             std::to_string(e)];
      CMatrix eff = supp[x] * s * dag(supp[x]) / qe;
      br.effects.push_back(0.5 * (eff + dag(eff)));
    }
    br.guess = e;
    strat.branches.push_back(std::move(br));
  }
  rep.strategy = std::move(strat);
  return rep;
}

/// Residuals of the three defining constraints of a classical strategy
/// against the declared state, measurement, and observed statistics.
inline std::map<std::string, double> classical_strategy_residuals(
    const ClassicalStrategy &s, const QState &rho, const Povm &m) {
  std::map<std::string, double> res;
  const Eigen::Index d = rho.dim;
  const size_t n = m.outcomes();
  double wsum = 0.0;
  CMatrix avg_state = CMatrix::Zero(d, d);
  std::vector<CMatrix> avg_eff(n, CMatrix::Zero(d, d));
  RVector stats = RVector::Zero(static_cast<Eigen::Index>(n));
  for (const ClassicalBranch &br : s.branches) {
    wsum += br.weight;
    avg_state += br.weight * projector(br.phi);
    for (size_t x = 0; x < n; ++x) {
      avg_eff[x] += br.weight * br.effects[x];
      stats(static_cast<Eigen::Index>(x)) +=
          br.weight * (dag(br.phi) * br.effects[x] * br.phi)(0, 0).real();
    }
  }
  res["weights"] = std::abs(wsum - 1.0);
  res["state"] = (avg_state - rho.rho).cwiseAbs().maxCoeff();
  double povm_res = 0.0, stat_res = 0.0;
  const RVector p = born(rho, m);
  for (size_t x = 0; x < n; ++x) {
    povm_res = std::max(povm_res,
                        (avg_eff[x] - m.effects[x]).cwiseAbs().maxCoeff());
    stat_res = std::max(
        stat_res, std::abs(stats(static_cast<Eigen::Index>(x)) -
                           p(static_cast<Eigen::Index>(x))));
  }
  res["povm"] = povm_res;
  res["statistics"] = stat_res;
  return res;
}

/// Evaluates the success probability of a classical strategy after checking
/// its constraints; violations beyond tol raise an error naming them.
inline GuessReport eval_classical_strategy(const ClassicalStrategy &s,
                                           const QState &rho, const Povm &m,
                                           double tol = 1e-7) {
  GuessReport rep;
  rep.kind = GuessKind::kStrategyLowerBound;
  rep.residuals = classical_strategy_residuals(s, rho, m);
  std::string bad;
  for (const auto &[name, r] : rep.residuals)
    if (r > tol) bad += (bad.empty() ? "" : ", ") + name;
  if (!bad.empty())
    throw std::invalid_argument(
        "eval_classical_strategy: constraint violation in: " + bad);
  double value = 0.0;
  for (const ClassicalBranch &br : s.branches)
    value += br.weight *
             (dag(br.phi) * br.effects[br.guess] * br.phi)(0, 0).real();
  rep.value = value;
  rep.strategy = s;
  return rep;
}

/// Residuals of the three defining constraints of a quantum strategy.
inline std::map<std::string, double> quantum_strategy_residuals(
    const QuantumStrategy &s, const QState &rho, const Povm &m) {
  std::map<std::string, double> res;
  const Eigen::Index ds = s.impl.system_dim, da = s.impl.ancilla_dim;
  const Eigen::Index de = s.psi.size() / (ds * da);
  const std::vector<Eigen::Index> dims{ds, da, de};
  const CMatrix full = projector(s.psi);

  CMatrix marg_s = partial_trace(full, dims, {1, 2});
  res["state"] = (marg_s - rho.rho).cwiseAbs().maxCoeff();

  CMatrix sigma_a = partial_trace(full, dims, {0, 2});
  ProjImpl impl = s.impl;
  impl.ancilla_state = QState(CMatrix(0.5 * (sigma_a + dag(sigma_a))));
  res["povm"] = verify_dilation(impl, m);

  double stat_res = 0.0;
  const RVector p = born(rho, m);
  for (size_t x = 0; x < m.outcomes(); ++x) {
    CMatrix op = kron(s.impl.projectors[x], identity(de));
    double lhs = (dag(s.psi) * op * s.psi)(0, 0).real();
    stat_res = std::max(stat_res,
                        std::abs(lhs - p(static_cast<Eigen::Index>(x))));
  }
  res["statistics"] = stat_res;
  return res;
}

/// Evaluates sum_x <psi| Pi^x (x) M_E^x |psi> after checking the strategy
/// constraints; violations beyond tol raise an error naming them.
inline GuessReport eval_quantum_strategy(const QuantumStrategy &s,
                                         const QState &rho, const Povm &m,
                                         double tol = 1e-7) {
  GuessReport rep;
  rep.kind = GuessKind::kStrategyLowerBound;
  rep.residuals = quantum_strategy_residuals(s, rho, m);
  std::string bad;
  for (const auto &[name, r] : rep.residuals)
    if (r > tol) bad += (bad.empty() ? "" : ", ") + name;
  if (!bad.empty())
    throw std::invalid_argument(
        "eval_quantum_strategy: constraint violation in: " + bad);
  double value = 0.0;
  for (size_t x = 0; x < m.outcomes(); ++x) {
    CMatrix op = kron(s.impl.projectors[x], s.eve_povm.effects[x]);
    value += (dag(s.psi) * op * s.psi)(0, 0).real();
  }
  rep.value = value;
  return rep;
}

/// Constructive lift of a classical strategy to a quantum strategy of the
/// same value: the measurement branches dilate to a projective measurement
/// on S (x) A1 (x) A2 and the adversary holds an index register correlated
/// with the branch, measured in the computational basis grouped by guess.
inline QuantumStrategy lift_classical_to_quantum(const ClassicalStrategy &s) {
  std::vector<const ClassicalBranch *> kept;
  for (const ClassicalBranch &br : s.branches)
    if (br.weight > 1e-12) kept.push_back(&br);  // degenerate columns dropped
  if (kept.empty())
    throw std::invalid_argument("lift_classical_to_quantum: empty strategy");
  const Eigen::Index ds = kept.front()->phi.size();
  const Eigen::Index nx = static_cast<Eigen::Index>(kept.front()->effects.size());
  const Eigen::Index nb = static_cast<Eigen::Index>(kept.size());

  std::vector<PovmBranch> decomp;
  for (const ClassicalBranch *br : kept) decomp.push_back({br->weight, br->effects});
  QuantumStrategy out;
  out.impl = naimark_from_decomposition(decomp);

  // psi = sum_b sqrt(p_b) |phi_b> (x) |0, b>_{A1 A2} (x) |b>_E.
  const Eigen::Index da = out.impl.ancilla_dim;  // nx * nb
  out.psi = CVector::Zero(ds * da * nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const double w = std::sqrt(kept[b]->weight);
    for (Eigen::Index sidx = 0; sidx < ds; ++sidx) {
      const Eigen::Index a = 0 * nb + b;  // |0, b> in A1 (x) A2
      out.psi((sidx * da + a) * nb + b) += w * kept[b]->phi(sidx);
    }
  }

  std::vector<CMatrix> eve(nx, CMatrix::Zero(nb, nb));
  for (Eigen::Index b = 0; b < nb; ++b) eve[kept[b]->guess](b, b) = 1.0;
  out.eve_povm = Povm(std::move(eve));
  return out;
}

/// Finds a nonzero support-compatible perturbation {D_x} with sum_x D_x = 0,
/// or reports that none exists (the POVM is then extremal).
namespace pguess_detail {

struct Perturbation {
  bool found = false;
  std::vector<CMatrix> d;
};

inline Perturbation find_perturbation(const std::vector<CMatrix> &effects,
                                      double tol) {
  const Eigen::Index d = effects.front().rows();
  // Support eigenbases.
  std::vector<CMatrix> bases;
  std::vector<Eigen::Index> ranks;
  for (const CMatrix &e : effects) {
    Eigh es = eigh(e);
    Eigen::Index r = 0;
    while (r < d && es.eigenvalues(r) > tol) ++r;
    ranks.push_back(r);
    bases.push_back(es.eigenvectors.leftCols(r));
  }
  Eigen::Index ncols = 0;
  for (Eigen::Index r : ranks) ncols += r * r;
  if (ncols == 0) return {};

  // Real coordinates of a d x d Hermitian matrix: diagonal then upper
  // triangle (real, imaginary). The constraint sum_x D_x = 0 is linear in
  // the Hermitian parameters H_x of D_x = V_x H_x V_x^dag.
  auto coords = [d](const CMatrix &h) {
    RVector v(d * d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) v(k++) = h(i, i).real();
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j) {
        v(k++) = h(i, j).real();
        v(k++) = h(i, j).imag();
      }
    return v;
  };
  RMatrix cmat(d * d, ncols);
  std::vector<std::vector<CMatrix>> dirs(effects.size());
  Eigen::Index col = 0;
  for (size_t x = 0; x < effects.size(); ++x) {
    const Eigen::Index r = ranks[x];
    const CMatrix &v = bases[x];
    auto push = [&](const CMatrix &h) {
      CMatrix full = v * h * dag(v);
      dirs[x].push_back(full);
      cmat.col(col++) = coords(full);
    };
    for (Eigen::Index i = 0; i < r; ++i) {
      CMatrix h = CMatrix::Zero(r, r);
      h(i, i) = 1.0;
      push(h);
      for (Eigen::Index j = i + 1; j < r; ++j) {
        CMatrix hr = CMatrix::Zero(r, r), hi = CMatrix::Zero(r, r);
        hr(i, j) = hr(j, i) = 1.0;
        hi(i, j) = Complex(0, 1);
        hi(j, i) = Complex(0, -1);
        push(hr);
        push(hi);
      }
    }
  }
  Eigen::FullPivLU<RMatrix> lu(cmat);
  lu.setThreshold(1e-8);
  if (lu.dimensionOfKernel() == 0) return {};
  RVector kvec = lu.kernel().col(0);
  if (kvec.cwiseAbs().maxCoeff() <= 0) return {};
  kvec /= kvec.cwiseAbs().maxCoeff();

  Perturbation pert;
  pert.found = true;
  pert.d.assign(effects.size(), CMatrix::Zero(d, d));
  Eigen::Index k = 0;
  for (size_t x = 0; x < effects.size(); ++x)
    for (const CMatrix &dir : dirs[x]) pert.d[x] += kvec(k++) * dir;
  // Enforce the constraint exactly up to numerics by symmetrizing.
  CMatrix total = CMatrix::Zero(d, d);
  for (const CMatrix &m : pert.d) total += m;
  pert.d.back() -= total;
  return pert;
}

/// Largest t >= 0 with M_x + t D_x >= 0 for all x, computed on supports.
inline double max_psd_step(const std::vector<CMatrix> &effects,
                           const std::vector<CMatrix> &dirs, double tol) {
  double t = std::numeric_limits<double>::infinity();
  const Eigen::Index d = effects.front().rows();
  for (size_t x = 0; x < effects.size(); ++x) {
    Eigh es = eigh(effects[x]);
    Eigen::Index r = 0;
    while (r < d && es.eigenvalues(r) > tol) ++r;
    if (r == 0) continue;  // zero effect: direction is zero there too
    CMatrix v = es.eigenvectors.leftCols(r);
    RVector lam = es.eigenvalues.head(r);
    CMatrix white = lam.cwiseSqrt().cwiseInverse().asDiagonal();
    CMatrix b = white * dag(v) * dirs[x] * v * white;
    Eigh bs = eigh(CMatrix(0.5 * (b + dag(b))));
    const double lo = bs.eigenvalues.minCoeff();
    if (lo < -1e-12) t = std::min(t, -1.0 / lo);
  }
  return t;
}

}  // namespace pguess_detail

/// Decomposes a POVM into a convex combination of extremal POVMs by
/// recursively perturbing along support-compatible directions until no
/// perturbation exists. Each leaf of the recursion is extremal.
inline std::vector<std::pair<double, std::vector<CMatrix>>> refine_extremal(
    const std::vector<CMatrix> &effects, double tol = 1e-9, int depth = 0) {
  using pguess_detail::find_perturbation;
  using pguess_detail::max_psd_step;
  if (depth > 64)
    throw std::runtime_error("refine_extremal: recursion depth exceeded");
  pguess_detail::Perturbation pert = find_perturbation(effects, tol);
  if (!pert.found) return {{1.0, effects}};

  std::vector<CMatrix> neg;
  for (const CMatrix &m : pert.d) neg.push_back(-m);
  double tp = max_psd_step(effects, pert.d, tol);
  double tm = max_psd_step(effects, neg, tol);
  if (!std::isfinite(tp) || !std::isfinite(tm) || tp + tm <= 0)
    return {{1.0, effects}};  // numerically flat direction; stop refining

  auto shifted = [&](double t) {
    std::vector<CMatrix> out;
    for (size_t x = 0; x < effects.size(); ++x) {
      CMatrix e = effects[x] + t * pert.d[x];
      // Clip stray negative eigenvalues introduced by roundoff.
      Eigh es = eigh(CMatrix(0.5 * (e + dag(e))));
      CMatrix rebuilt = CMatrix::Zero(e.rows(), e.cols());
      for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k)
        if (es.eigenvalues(k) > tol)
          rebuilt += es.eigenvalues(k) * es.eigenvectors.col(k) *
                     dag(CMatrix(es.eigenvectors.col(k)));
      out.push_back(rebuilt);
    }
    return out;
  };
  const double wp = tm / (tp + tm), wm = tp / (tp + tm);
  std::vector<std::pair<double, std::vector<CMatrix>>> out;
  for (auto &[w, m] : refine_extremal(shifted(tp), tol, depth + 1))
    out.push_back({wp * w, std::move(m)});
  for (auto &[w, m] : refine_extremal(shifted(-tm), tol, depth + 1))
    out.push_back({wm * w, std::move(m)});
  return out;
}

/// Replaces every branch of a classical strategy by extremal refinements,
/// re-optimizing the guess on each refined branch (ties to the smallest
/// outcome label). The value never decreases.
inline ClassicalStrategy refine_strategy(const ClassicalStrategy &s,
                                         double tol = 1e-9) {
  ClassicalStrategy out;
  for (const ClassicalBranch &br : s.branches) {
    if (br.weight <= 1e-12) continue;
    for (auto &[w, effects] : refine_extremal(br.effects, tol)) {
      ClassicalBranch sub;
      sub.weight = br.weight * w;
      sub.phi = br.phi;
      sub.effects = effects;
      int best = 0;
      double best_val = -1.0;
      for (size_t x = 0; x < effects.size(); ++x) {
        const double v = (dag(br.phi) * effects[x] * br.phi)(0, 0).real();
        if (v > best_val + 1e-12) {
          best_val = v;
          best = static_cast<int>(x);
        }
      }
      sub.guess = best;
      out.branches.push_back(std::move(sub));
    }
  }
  return out;
}

/// A product component of a separable decomposition of a post-measurement
/// state on S (x) A.
struct ProductDecomposition {
  double weight = 0.0;  // subnormalized: includes the outcome probability
  CVector s_part;
  CVector a_part;
};

/// Builds a classical strategy from a quantum strategy whose conditional
/// post-measurement states tau_SA^e = Tr_E[(I (x) M_E^e)|psi><psi|] are
/// separable, using caller-supplied product decompositions (one list per
/// adversary outcome). The branch measurements are refined to extremal
/// POVMs with re-optimized guesses, so the classical value is at least the
/// quantum one.
inline ClassicalStrategy extract_classical_from_separable(
    const QuantumStrategy &s,
    const std::vector<std::vector<ProductDecomposition>> &decomps,
    double tol = 1e-7) {
  const Eigen::Index ds = s.impl.system_dim, da = s.impl.ancilla_dim;
  const Eigen::Index de = s.psi.size() / (ds * da);
  const std::vector<Eigen::Index> dims{ds, da, de};
  const CMatrix full = projector(s.psi);
  if (decomps.size() != s.eve_povm.outcomes())
    throw std::invalid_argument(
        "extract_classical_from_separable: one decomposition per adversary "
        "outcome required");

  ClassicalStrategy strat;
  for (size_t e = 0; e < decomps.size(); ++e) {
    // Verify the supplied decomposition against tau_SA^e.
    CMatrix tau = partial_trace(
        CMatrix(kron(identity(ds * da), s.eve_povm.effects[e]) * full), dims,
        {2});
    CMatrix rebuilt = CMatrix::Zero(ds * da, ds * da);
    for (const ProductDecomposition &pd : decomps[e])
      rebuilt += pd.weight * projector(kron_vec(pd.s_part, pd.a_part));
    if ((rebuilt - tau).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument(
          "extract_classical_from_separable: decomposition mismatch for "
          "outcome " +
          std::to_string(e));

    for (const ProductDecomposition &pd : decomps[e]) {
      if (pd.weight <= 1e-12) continue;
      ClassicalBranch br;
      br.weight = pd.weight;
      br.phi = pd.s_part;
      const CMatrix chi = projector(pd.a_part);
      for (size_t y = 0; y < s.impl.projectors.size(); ++y) {
        CMatrix f = partial_trace(
            CMatrix(s.impl.projectors[y] * kron(identity(ds), chi)),
            {ds, da}, {1});
        br.effects.push_back(0.5 * (f + dag(f)));
      }
      br.guess = 0;  // re-optimized by the refinement below
      strat.branches.push_back(std::move(br));
    }
  }
  return refine_strategy(strat);
}

/// Output of the perfect-for-quantum construction from an entangled basis.
struct PerfectConstruction {
  QState rho;
  Povm povm;
  QuantumStrategy strategy;
};

/// Given an orthonormal basis {psi^x} of S (x) A with dim(S) = dim(A) = d,
/// returns rho = I/d, the POVM M^x = Tr_A[|psi^x><psi^x|]/d and a quantum
/// strategy guessing the outcome with certainty.
inline PerfectConstruction perfect_quantum_construction(
    const std::vector<CVector> &basis, double tol = 1e-9) {
  const Eigen::Index dsq = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index d = static_cast<Eigen::Index>(std::llround(
      std::sqrt(static_cast<double>(dsq))));
  if (d * d != dsq || basis.empty() ||
      basis.front().size() != dsq)
    throw std::invalid_argument(
        "perfect_quantum_construction: need d^2 vectors on a d*d space");
  for (Eigen::Index i = 0; i < dsq; ++i)
    for (Eigen::Index j = 0; j < dsq; ++j) {
      const Complex g = (dag(basis[i]) * basis[j])(0, 0);
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > tol)
        throw std::invalid_argument(
            "perfect_quantum_construction: basis not orthonormal");
    }

  PerfectConstruction out;
  out.rho = QState(CMatrix(identity(d) / static_cast<double>(d)));
  std::vector<CMatrix> eff;
  for (const CVector &v : basis)
    eff.push_back(partial_trace(projector(v), {d, d}, {1}) /
                  static_cast<double>(d));
  out.povm = Povm(eff);

  out.strategy.impl.system_dim = d;
  out.strategy.impl.ancilla_dim = d;
  for (const CVector &v : basis) out.strategy.impl.projectors.push_back(projector(v));
  out.strategy.impl.ancilla_state =
      QState(CMatrix(identity(d) / static_cast<double>(d)));

  // psi = sum_x (1/d) |psi^x>_{SA} |x>_E.
  CVector psi = CVector::Zero(dsq * dsq);
  for (Eigen::Index x = 0; x < dsq; ++x)
    for (Eigen::Index sa = 0; sa < dsq; ++sa)
      psi(sa * dsq + x) += basis[x](sa) / static_cast<double>(d);
  out.strategy.psi = psi;

  std::vector<CMatrix> eve;
  for (Eigen::Index x = 0; x < dsq; ++x)
    eve.push_back(projector(CVector(basis_ket(dsq, x))));
  out.strategy.eve_povm = Povm(std::move(eve));
  return out;
}

/// Certificate that the classical guessing probability is below one for
/// every input state, via projective non-simulability of the measurement.
struct PcCertificate {
  bool applicable = false;
  bool certified = false;
  double t_star = 1.0;
  std::optional<std::vector<double>> dual_certificate;
};

/// Applicable to qubit POVMs with at most four outcomes (padded with zero
/// effects to four). If the visibility threshold is below 1 - tol, no convex
/// combination of projective measurements reproduces the POVM and hence no
/// classical strategy predicts its outcome with certainty on any state.
inline PcCertificate certify_pc_below_one(const Povm &m, double tol = 1e-6) {
  PcCertificate cert;
  if (m.dim != 2 || m.outcomes() > 4)
    throw std::invalid_argument(
        "certify_pc_below_one: applicability requires a qubit POVM with at "
        "most 4 outcomes");
  Povm padded = m;
  while (padded.outcomes() < 4) {
    padded.effects.push_back(CMatrix::Zero(2, 2));
    padded.labels.push_back("pad" + std::to_string(padded.outcomes()));
  }
  cert.applicable = true;
  VisibilityResult vis = pm_visibility(padded);
  cert.t_star = vis.t_star;
  cert.dual_certificate = vis.dual_certificate;
  cert.certified = vis.t_star < 1.0 - tol && vis.dual_certificate.has_value();
  return cert;
}

}  // namespace qrm

#endif  // QRM_PGUESS_HPP
