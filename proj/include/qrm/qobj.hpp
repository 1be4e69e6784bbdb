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
 * @file qobj.hpp
 * @brief Quantum-information domain objects: states, POVMs, projective
 * implementations (Naimark dilations) and ensembles, with validation,
 * Born-rule statistics, purification, steering and the constructive
 * dilation of a POVM decomposition.
 */

#ifndef QRM_QOBJ_HPP
#define QRM_QOBJ_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrm/matcore.hpp"

namespace qrm {

/// Density operator on a finite-dimensional system.
struct QState {
  Eigen::Index dim = 0;
  CMatrix rho;

  QState() = default;
  explicit QState(CMatrix r) : dim(r.rows()), rho(std::move(r)) {}
};

/// Positive-operator-valued measure: effects are Hermitian PSD and sum to I.
struct Povm {
  Eigen::Index dim = 0;
  std::vector<CMatrix> effects;
  std::vector<std::string> labels;

  Povm() = default;
  Povm(std::vector<CMatrix> eff, std::vector<std::string> lab = {})
      : dim(eff.empty() ? 0 : eff.front().rows()),
        effects(std::move(eff)),
        labels(std::move(lab)) {
    if (labels.empty()) {
      for (size_t x = 0; x < effects.size(); ++x)
        labels.push_back(std::to_string(x));
    }
  }

  size_t outcomes() const { return effects.size(); }
};

/// Projective implementation of a POVM: orthogonal projectors on
/// system (x) ancilla together with an ancilla state such that
/// Tr_A[Pi^x (I_S (x) sigma_A)] reproduces the POVM effects.
struct ProjImpl {
  Eigen::Index system_dim = 0;
  Eigen::Index ancilla_dim = 0;
  std::vector<CMatrix> projectors;  // on system (x) ancilla
  QState ancilla_state;             // sigma_A
};

/// Weighted list of states; weights form a probability distribution.
struct Ensemble {
  std::vector<std::pair<double, QState>> members;
};

/// Validation outcome: one named check per invariant with its residual.
struct ValidationReport {
  struct Item {
    std::string name;
    double residual = 0.0;
    bool pass = false;
  };
  std::vector<Item> items;
  bool ok = true;

  void add(const std::string &name, double residual, double tol) {
    items.push_back({name, residual, residual <= tol});
    ok = ok && items.back().pass;
  }
};

namespace qobj_detail {

inline double herm_residual(const CMatrix &m) {
  return (m - dag(m)).cwiseAbs().maxCoeff();
}

inline double psd_residual(const CMatrix &m) {
  CMatrix h = 0.5 * (m + dag(m));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  return lo < 0 ? -lo : 0.0;
}

}  // namespace qobj_detail

/// Checks Hermiticity, positivity and unit trace of a density operator.
inline ValidationReport validate(const QState &s, double tol = kDefaultTol) {
  ValidationReport rep;
  rep.add("hermitian", qobj_detail::herm_residual(s.rho), tol);
  rep.add("psd", qobj_detail::psd_residual(s.rho), tol);
  rep.add("unit_trace", std::abs(s.rho.trace().real() - 1.0) +
                            std::abs(s.rho.trace().imag()),
          tol);
  return rep;
}

/// Checks that every effect is Hermitian PSD and that effects sum to I.
inline ValidationReport validate(const Povm &m, double tol = kDefaultTol) {
  ValidationReport rep;
  if (m.effects.empty()) {
    rep.add("nonempty", 1.0, tol);
    return rep;
  }
  CMatrix sum = CMatrix::Zero(m.dim, m.dim);
  for (size_t x = 0; x < m.effects.size(); ++x) {
    const CMatrix &e = m.effects[x];
    rep.add("effect_" + std::to_string(x) + "_hermitian",
            qobj_detail::herm_residual(e), tol);
    rep.add("effect_" + std::to_string(x) + "_psd",
            qobj_detail::psd_residual(e), tol);
    sum += e;
  }
  rep.add("completeness",
          (sum - CMatrix::Identity(m.dim, m.dim)).cwiseAbs().maxCoeff(), tol);
  return rep;
}

/// Forward declaration; defined below.
inline double verify_dilation(const ProjImpl &impl, const Povm &m);

/// Checks projector orthogonality/completeness and, when a POVM is supplied,
/// the dilation identity Tr_A[Pi^x (I (x) sigma_A)] = M^x.
inline ValidationReport validate(const ProjImpl &impl, const Povm *declared = nullptr,
                                 double tol = kDefaultTol) {
  ValidationReport rep;
  const Eigen::Index d = impl.system_dim * impl.ancilla_dim;
  CMatrix sum = CMatrix::Zero(d, d);
  for (size_t x = 0; x < impl.projectors.size(); ++x) {
    const CMatrix &p = impl.projectors[x];
    rep.add("projector_" + std::to_string(x) + "_idempotent",
            (p * p - p).cwiseAbs().maxCoeff(), tol);
    rep.add("projector_" + std::to_string(x) + "_hermitian",
            qobj_detail::herm_residual(p), tol);
    sum += p;
  }
  rep.add("completeness",
          (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff(), tol);
  for (size_t x = 0; x < impl.projectors.size(); ++x)
    for (size_t y = x + 1; y < impl.projectors.size(); ++y)
      rep.add("orthogonality_" + std::to_string(x) + "_" + std::to_string(y),
              (impl.projectors[x] * impl.projectors[y]).cwiseAbs().maxCoeff(),
              tol);
  ValidationReport anc = validate(impl.ancilla_state, tol);
  for (const auto &it : anc.items) rep.add("ancilla_" + it.name, it.residual, tol);
  if (declared) rep.add("dilation", verify_dilation(impl, *declared), tol);
  return rep;
}

/// Checks weight positivity/normalization and member-state validity.
inline ValidationReport validate(const Ensemble &e, double tol = kDefaultTol) {
  ValidationReport rep;
  double total = 0.0, neg = 0.0;
  for (const auto &[w, s] : e.members) {
    total += w;
    neg = std::min(neg, w);
  }
  rep.add("weights_nonnegative", -neg, tol);
  rep.add("weights_normalized", std::abs(total - 1.0), tol);
  for (size_t k = 0; k < e.members.size(); ++k) {
    ValidationReport sr = validate(e.members[k].second, tol);
    for (const auto &it : sr.items)
      rep.add("member_" + std::to_string(k) + "_" + it.name, it.residual, tol);
  }
  return rep;
}

/// Born rule: p(x) = Tr[M^x rho].
inline RVector born(const QState &rho, const Povm &m) {
  if (rho.dim != m.dim) throw std::invalid_argument("born: dimension mismatch");
  RVector p(static_cast<Eigen::Index>(m.effects.size()));
  for (size_t x = 0; x < m.effects.size(); ++x)
    p(static_cast<Eigen::Index>(x)) = (m.effects[x] * rho.rho).trace().real();
  return p;
}

/// Spectral purification of rho on system (x) environment; the environment
/// dimension equals the rank of rho. Returns the pure state vector ordered
/// system-major: |psi> = sum_k sqrt(p_k) |v_k>_S |k>_E.
inline CVector purify(const QState &rho, double tol = 1e-12) {
  Eigh es = eigh(rho.rho);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k)
    if (es.eigenvalues(k) > tol) ++rank;
  rank = std::max<Eigen::Index>(rank, 1);
  CVector psi = CVector::Zero(rho.dim * rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    double p = std::max(0.0, es.eigenvalues(k));
    for (Eigen::Index s = 0; s < rho.dim; ++s)
      psi(s * rank + k) = std::sqrt(p) * es.eigenvectors(s, k);
  }
  return psi;
}

/// One steered branch: outcome probability and the conditional state left on
/// the unmeasured side. Zero-probability outcomes carry a zero matrix.
struct SteeredBranch {
  double probability = 0.0;
  CMatrix state;  // normalized conditional state (zero if probability ~ 0)
};

/// Measures subsystem `measured` (0 = A, 1 = B) of a bipartite pure state with
/// the given POVM and returns the ensemble steered on the other subsystem.
inline std::vector<SteeredBranch> steer(const CVector &psi, Eigen::Index dim_a,
                                        Eigen::Index dim_b, int measured,
                                        const Povm &m) {
  if (psi.size() != dim_a * dim_b)
    throw std::invalid_argument("steer: state dimension mismatch");
  if ((measured == 0 ? dim_a : dim_b) != m.dim)
    throw std::invalid_argument("steer: measurement dimension mismatch");
  const CMatrix full = projector(psi);
  const std::vector<Eigen::Index> dims{dim_a, dim_b};
  std::vector<SteeredBranch> out;
  for (const CMatrix &eff : m.effects) {
    CMatrix op = measured == 0 ? kron(eff, identity(dim_b))
                               : kron(identity(dim_a), eff);
    CMatrix sub = partial_trace(op * full, dims, {measured});
    double p = sub.trace().real();
    SteeredBranch br;
    br.probability = std::max(0.0, p);
    if (p > 1e-12) {
      br.state = 0.5 * (sub + dag(sub)) / p;
    } else {
      br.state = CMatrix::Zero(sub.rows(), sub.cols());
    }
    out.push_back(std::move(br));
  }
  return out;
}

/// Maximum over outcomes of || Tr_A[Pi^x (I (x) sigma_A)] - M^x ||_inf.
inline double verify_dilation(const ProjImpl &impl, const Povm &m) {
  const std::vector<Eigen::Index> dims{impl.system_dim, impl.ancilla_dim};
  const CMatrix lift = kron(identity(impl.system_dim), impl.ancilla_state.rho);
  double worst = 0.0;
  for (size_t x = 0; x < impl.projectors.size(); ++x) {
    CMatrix red = partial_trace(impl.projectors[x] * lift, dims, {1});
    worst = std::max(worst, (red - m.effects[x]).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// One branch of a convex decomposition of a POVM: a weight and sub-effects
/// M^{x,j} forming a POVM of their own.
struct PovmBranch {
  double weight = 0.0;
  std::vector<CMatrix> effects;
};

/// Builds a projective implementation of the aggregate POVM
/// sum_j p(j) M^{x,j} on a two-part ancilla A1 (x) A2 with dim(A1) = number of
/// outcomes and dim(A2) = number of branches. The ancilla state is
/// |0><0| (x) sum_j p(j)|j><j| and the projectors are Pi^x = U^dag (I (x)
/// |x><x| (x) I) U for a unitary U extending the isometry
/// |s,0,j> -> sum_x sqrt(M^{x,j}) |s,x,j>.
inline ProjImpl naimark_from_decomposition(const std::vector<PovmBranch> &decomp) {
  if (decomp.empty())
    throw std::invalid_argument("naimark_from_decomposition: empty decomposition");
  const Eigen::Index ds = decomp.front().effects.front().rows();
  const Eigen::Index nx = static_cast<Eigen::Index>(decomp.front().effects.size());
  const Eigen::Index nj = static_cast<Eigen::Index>(decomp.size());
  double wsum = 0.0;
  for (const auto &br : decomp) {
    if (static_cast<Eigen::Index>(br.effects.size()) != nx)
      throw std::invalid_argument(
          "naimark_from_decomposition: branches disagree on outcome count");
    wsum += br.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-7)
    throw std::invalid_argument(
        "naimark_from_decomposition: branch weights do not sum to 1");

  const Eigen::Index da = nx * nj;   // ancilla = A1 (x) A2
  const Eigen::Index dt = ds * da;   // total = S (x) A1 (x) A2

  // Isometry columns: the image of |s, 0, j> is sum_x sqrt(M^{x,j}) |s, x, j>.
  CMatrix iso = CMatrix::Zero(dt, ds * nj);
  std::vector<std::vector<CMatrix>> roots(nj);
  for (Eigen::Index j = 0; j < nj; ++j)
    for (Eigen::Index x = 0; x < nx; ++x)
      roots[j].push_back(psd_sqrt(decomp[j].effects[x]));
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index j = 0; j < nj; ++j) {
      const Eigen::Index col = s * nj + j;
      for (Eigen::Index x = 0; x < nx; ++x)
        for (Eigen::Index sp = 0; sp < ds; ++sp)
          iso((sp * nx + x) * nj + j, col) += roots[j][x](sp, s);
    }

  // Complete to a unitary whose leading action matches the isometry on the
  // |s, 0, j> sector: build U with U |s,0,j> = iso column.
  CMatrix u_cols = unitary_completion(iso);
  // u_cols columns 0..ds*nj-1 correspond to inputs |s,0,j>; remaining columns
  // fill the orthogonal complement. Scatter them to their basis positions.
  CMatrix u = CMatrix::Zero(dt, dt);
  Eigen::Index extra = ds * nj;
  std::vector<bool> used(dt, false);
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index j = 0; j < nj; ++j)
      used[(s * nx + 0) * nj + j] = true;
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index j = 0; j < nj; ++j)
      u.col((s * nx + 0) * nj + j) = u_cols.col(s * nj + j);
  for (Eigen::Index k = 0; k < dt; ++k)
    if (!used[k]) u.col(k) = u_cols.col(extra++);

  ProjImpl impl;
  impl.system_dim = ds;
  impl.ancilla_dim = da;
  for (Eigen::Index x = 0; x < nx; ++x) {
    CMatrix sel = CMatrix::Zero(nx, nx);
    sel(x, x) = 1.0;
    CMatrix mid = kron(kron(identity(ds), sel), identity(nj));
    CMatrix p = dag(u) * mid * u;
    impl.projectors.push_back(0.5 * (p + dag(p)));
  }
  CMatrix sigma2 = CMatrix::Zero(nj, nj);
  for (Eigen::Index j = 0; j < nj; ++j) sigma2(j, j) = decomp[j].weight;
  CMatrix anc1 = CMatrix::Zero(nx, nx);
  anc1(0, 0) = 1.0;
  impl.ancilla_state = QState(kron(anc1, sigma2));
  return impl;
}

/// Extremality test for rank-one POVMs: writes each nonzero effect as
/// alpha |a><a| and checks linear independence of the effects as operators.
/// Returns `applicable = false` when some nonzero effect has rank > 1.
struct ExtremalityResult {
  bool applicable = false;
  bool extremal = false;
};

inline ExtremalityResult is_extremal_rank_one(const Povm &m,
                                              double tol = kDefaultTol) {
  ExtremalityResult res;
  std::vector<CMatrix> nonzero;
  for (const CMatrix &e : m.effects) {
    if (e.cwiseAbs().maxCoeff() <= tol) continue;  // zero effects are fine
    Eigh es = eigh(e);
    // Rank-one within tol: only the top eigenvalue may exceed tol.
    for (Eigen::Index k = 1; k < es.eigenvalues.size(); ++k)
      if (std::abs(es.eigenvalues(k)) > tol) return res;  // not applicable
    nonzero.push_back(e);
  }
  res.applicable = true;
  if (nonzero.empty()) return res;
  // Linear independence over the reals of the Hermitian effects, flattened
  // into real vectors (Re and Im parts stacked).
  const Eigen::Index d = m.dim;
  RMatrix flat(2 * d * d, static_cast<Eigen::Index>(nonzero.size()));
  for (size_t k = 0; k < nonzero.size(); ++k) {
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        flat(r++, static_cast<Eigen::Index>(k)) = nonzero[k](i, j).real();
        flat(r++, static_cast<Eigen::Index>(k)) = nonzero[k](i, j).imag();
      }
  }
  Eigen::ColPivHouseholderQR<RMatrix> qr(flat);
  qr.setThreshold(1e-8);
  res.extremal = qr.rank() == static_cast<Eigen::Index>(nonzero.size());
  return res;
}

}  // namespace qrm

#endif  // QRM_QOBJ_HPP
