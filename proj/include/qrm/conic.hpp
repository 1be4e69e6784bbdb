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
 * @file conic.hpp
 * @brief Small semidefinite programs with complex Hermitian matrix variables.
 *
 * Problems are stated over Hermitian variables with scalar trace equalities
 * and affine PSD constraints. Solving proceeds in three stages:
 *   1. complex-to-real symmetric embedding (embed_complex),
 *   2. compilation to a standard cone form (PSD blocks, Ax = b),
 *   3. a homogeneous self-dual interior-point solve with NT scaling.
 *
 * The embedding maps H = X + iY to [[X, -Y], [Y, X]] and halves the
 * coefficient matrices so objective and constraint values are preserved
 * exactly. Optima are unchanged even though the embedded variable ranges
 * over all symmetric matrices: averaging any feasible point with its
 * J-conjugate (J the symplectic swap) restores the embedded structure
 * without changing objective or constraints.
 */

#ifndef QRM_CONIC_HPP
#define QRM_CONIC_HPP

#include <cstdio>
#include <cstdlib>
#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrm/matcore.hpp"

namespace qrm {

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

/// Default solver tolerance; the QRM_SOLVER_TOL environment variable
/// overrides it when set to a positive value.
inline double default_solver_tol() {
  if (const char *s = std::getenv("QRM_SOLVER_TOL")) {
    const double v = std::atof(s);
    if (v > 0) return v;
  }
  return 1e-9;
}

enum class Sense { kMinimize, kMaximize };

/// One summand Tr[coeff * X_var]; coeff must be Hermitian.
struct LinTerm {
  int var = 0;
  CMatrix coeff;
};

struct Equality {
  std::vector<LinTerm> terms;
  double rhs = 0.0;
};

/// constant + sum_k scale_k * X_{var_k}  >= 0 (PSD). All dims must agree.
struct PsdConstraint {
  CMatrix constant;
  std::vector<std::pair<int, double>> terms;
};

struct SdpProblem {
  struct Variable {
    std::string name;
    Eigen::Index dim = 0;
  };

  std::vector<Variable> variables;
  std::vector<Equality> equalities;
  std::vector<PsdConstraint> psd_constraints;
  std::vector<LinTerm> objective;
  Sense sense = Sense::kMaximize;

  int add_variable(const std::string &name, Eigen::Index dim) {
    variables.push_back({name, dim});
    return static_cast<int>(variables.size()) - 1;
  }

  /// Marks X_var >= 0.
  void require_psd(int var) {
    PsdConstraint c;
    c.constant = CMatrix::Zero(variables[var].dim, variables[var].dim);
    c.terms = {{var, 1.0}};
    psd_constraints.push_back(std::move(c));
  }

  void add_equality(std::vector<LinTerm> terms, double rhs) {
    equalities.push_back({std::move(terms), rhs});
  }

  /// Expands the matrix equality sum_k scale_k X_k + sum_l t_l D_l = B over an
  /// orthogonal Hermitian operator basis. Matrix-valued terms come as
  /// (var, scale); scalar variables (dim 1) couple through a fixed Hermitian
  /// direction D.
  void add_matrix_equality(const std::vector<std::pair<int, double>> &mat_terms,
                           const std::vector<std::pair<int, CMatrix>> &scalar_terms,
                           const CMatrix &rhs) {
    const Eigen::Index d = rhs.rows();
    auto add_one = [&](const CMatrix &e) {
      std::vector<LinTerm> terms;
      for (const auto &[var, scale] : mat_terms)
        terms.push_back({var, CMatrix(scale * e)});
      for (const auto &[var, dir] : scalar_terms) {
        const double c = (e * dir).trace().real();
        terms.push_back({var, CMatrix(c * CMatrix::Identity(1, 1))});
      }
      add_equality(std::move(terms), (e * rhs).trace().real());
    };
    for (Eigen::Index i = 0; i < d; ++i) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, i) = 1.0;
      add_one(e);
      for (Eigen::Index j = i + 1; j < d; ++j) {
        CMatrix er = CMatrix::Zero(d, d), ei = CMatrix::Zero(d, d);
        er(i, j) = er(j, i) = 1.0;
        ei(i, j) = Complex(0, 1);
        ei(j, i) = Complex(0, -1);
        add_one(er);
        add_one(ei);
      }
    }
  }

  void set_objective(std::vector<LinTerm> terms, Sense s) {
    objective = std::move(terms);
    sense = s;
  }
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  std::map<std::string, CMatrix> values;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  /// Farkas-type improving ray on the equality multipliers when infeasible.
  std::vector<double> infeasibility_certificate;
};

namespace conic_detail {

inline RMatrix embed(const CMatrix &a) {
  const Eigen::Index n = a.rows();
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = a.real();
  out.bottomRightCorner(n, n) = a.real();
  out.topRightCorner(n, n) = -a.imag();
  out.bottomLeftCorner(n, n) = a.imag();
  return out;
}

inline CMatrix unembed(const RMatrix &z) {
  const Eigen::Index n = z.rows() / 2;
  CMatrix h(n, n);
  h.real() = 0.5 * (z.topLeftCorner(n, n) + z.bottomRightCorner(n, n));
  h.imag() = 0.5 * (z.bottomLeftCorner(n, n) - z.topRightCorner(n, n));
  return CMatrix(0.5 * (h + h.adjoint()));
}

// --- standard cone form -----------------------------------------------------

using BlockVec = std::vector<RMatrix>;

struct SparseRow {
  std::vector<std::pair<int, RMatrix>> entries;  // (block, symmetric matrix)
};

struct ConeProblem {
  std::vector<Eigen::Index> block_dims;
  std::vector<SparseRow> rows;  // equality constraints
  RVector b;
  SparseRow cost;  // minimize <cost, x>
};

inline double dot(const SparseRow &row, const BlockVec &x) {
  double acc = 0.0;
  for (const auto &[blk, mat] : row.entries)
    acc += (mat.array() * x[blk].array()).sum();
  return acc;
}

inline BlockVec zero_like(const std::vector<Eigen::Index> &dims) {
  BlockVec v;
  v.reserve(dims.size());
  for (auto d : dims) v.push_back(RMatrix::Zero(d, d));
  return v;
}

inline double bdot(const BlockVec &a, const BlockVec &b) {
  double acc = 0.0;
  for (size_t k = 0; k < a.size(); ++k)
    acc += (a[k].array() * b[k].array()).sum();
  return acc;
}

inline double bnorm(const BlockVec &a) { return std::sqrt(std::max(0.0, bdot(a, a))); }

struct HsdResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  BlockVec x, s;
  RVector y;
  double tau = 1.0, kappa = 1.0;
  int iterations = 0;
};

// Largest alpha with X + alpha * dX >= 0, given X > 0 (inf -> big constant).
inline double max_step(const RMatrix &x, const RMatrix &dx) {
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  RMatrix l = llt.matrixL();
  RMatrix m = l.triangularView<Eigen::Lower>().solve(dx);
  m = l.triangularView<Eigen::Lower>().solve(RMatrix(m.transpose()));
  Eigen::SelfAdjointEigenSolver<RMatrix> es(RMatrix(0.5 * (m + m.transpose())),
                                            Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return 1e30;
  return -1.0 / lmin;
}

// Nesterov-Todd scaling point W with W S W = X.
inline RMatrix nt_scaling(const RMatrix &x, const RMatrix &s) {
  Eigen::SelfAdjointEigenSolver<RMatrix> ex(x);
  RMatrix xh = ex.operatorSqrt();
  RMatrix t = xh * s * xh;
  Eigen::SelfAdjointEigenSolver<RMatrix> et(RMatrix(0.5 * (t + t.transpose())));
  RMatrix tinvsqrt = et.eigenvectors() *
                     et.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse()
                         .asDiagonal() *
                     et.eigenvectors().transpose();
  RMatrix w = xh * tinvsqrt * xh;
  return 0.5 * (w + w.transpose());
}

/// Homogeneous self-dual interior-point solve of
///   min <c,x>  s.t.  rows(x) = b,  x in PSD-blocks cone.
/// Equality rows must be linearly independent.
inline HsdResult solve_hsd(const ConeProblem &p, double tol, int max_iter = 300) {
  const int m = static_cast<int>(p.rows.size());
  const size_t nb = p.block_dims.size();
  double nu = 0;
  for (auto d : p.block_dims) nu += static_cast<double>(d);

  HsdResult r;
  r.x = zero_like(p.block_dims);
  r.s = zero_like(p.block_dims);
  for (size_t k = 0; k < nb; ++k) {
    r.x[k].setIdentity();
    r.s[k].setIdentity();
  }
  r.y = RVector::Zero(m);
  r.tau = 1.0;
  r.kappa = 1.0;

  // Best iterate seen so far, scored by the worst of the three convergence
  // metrics; late iterations can lose accuracy once mu reaches the numerical
  // floor of the Schur solve, so the best point is kept and returned.
  HsdResult best = r;
  double best_score = std::numeric_limits<double>::infinity();
  int stall = 0;

  const double bn = 1.0 + p.b.norm();
  BlockVec cmat = zero_like(p.block_dims);
  for (const auto &[blk, mat] : p.cost.entries) cmat[blk] += mat;
  const double cn = 1.0 + bnorm(cmat);

  auto a_apply = [&](const BlockVec &x) {
    RVector out(m);
    for (int i = 0; i < m; ++i) out(i) = dot(p.rows[i], x);
    return out;
  };
  auto at_apply = [&](const RVector &y) {
    BlockVec out = zero_like(p.block_dims);
    for (int i = 0; i < m; ++i)
      for (const auto &[blk, mat] : p.rows[i].entries) out[blk] += y(i) * mat;
    return out;
  };

  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it;
    // Residuals.
    RVector rp = a_apply(r.x) - r.tau * p.b;                   // want 0
    BlockVec aty = at_apply(r.y);
    BlockVec rd = zero_like(p.block_dims);                     // c*tau - A'y - s
    for (size_t k = 0; k < nb; ++k)
      rd[k] = r.tau * cmat[k] - aty[k] - r.s[k];
    const double cx = bdot(cmat, r.x), by = p.b.dot(r.y);
    const double rg = r.kappa + cx - by;

    const double xs = bdot(r.x, r.s);
    const double mu = (xs + r.tau * r.kappa) / (nu + 1.0);

    // Convergence checks (all quantities scaled by tau).
    const double pobj = cx / r.tau, dobj = by / r.tau;
    const double pres = rp.norm() / (r.tau * bn);
    const double dres = bnorm(rd) / (r.tau * cn);
    const double relgap =
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
#ifdef QRM_CONIC_TRACE
    std::fprintf(stderr,
                 "it=%3d mu=%9.2e tau=%9.2e kappa=%9.2e pres=%9.2e dres=%9.2e "
                 "relgap=%9.2e pobj=%12.9f\n",
                 it, mu, r.tau, r.kappa, pres, dres, relgap, pobj);
#endif
    const double gap_metric =
        std::min(relgap, std::abs(xs) / (r.tau * r.tau * (1.0 + std::abs(pobj))));
    const double score = std::max({pres, dres, gap_metric});
    if (score < best_score) {
      best = r;
      best.iterations = it;
      best_score = score;
      stall = 0;
    } else if (++stall >= 8) {
      break;  // no progress; return the best point seen
    }
    if (score <= tol) break;
    // Infeasibility / unboundedness: tau -> 0 with kappa bounded away.
    if (r.tau <= 1e-9 * std::max(1.0, r.kappa) && mu <= 1e-9) {
      if (by > tol * std::max(1.0, r.y.norm())) {
        r.status = SdpStatus::kInfeasible;
      } else if (cx < -tol) {
        r.status = SdpStatus::kUnbounded;
      } else {
        r.status = SdpStatus::kNumericalFailure;
      }
      return r;
    }

    // NT scalings.
    std::vector<RMatrix> w(nb);
    for (size_t k = 0; k < nb; ++k) w[k] = nt_scaling(r.x[k], r.s[k]);
    auto conj_w = [&](const BlockVec &v) {
      BlockVec out(nb);
      for (size_t k = 0; k < nb; ++k) {
        out[k] = w[k] * v[k] * w[k];
        out[k] = 0.5 * (out[k] + RMatrix(out[k].transpose()));
      }
      return out;
    };

    // Schur complement M = A G A^T with G = W (.) W.
    std::vector<BlockVec> garows(m);
    for (int i = 0; i < m; ++i) {
      BlockVec ai = zero_like(p.block_dims);
      for (const auto &[blk, mat] : p.rows[i].entries) ai[blk] += mat;
      garows[i] = conj_w(ai);
    }
    RMatrix schur(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double acc = 0.0;
        for (const auto &[blk, mat] : p.rows[i].entries)
          acc += (mat.array() * garows[j][blk].array()).sum();
        schur(i, j) = schur(j, i) = acc;
      }
    Eigen::LDLT<RMatrix> ldlt(schur);
    auto schur_solve = [&](const RVector &rhs) {
      RVector v = ldlt.solve(rhs);
      for (int ref = 0; ref < 3; ++ref) {
        RVector res = rhs - schur * v;
        if (res.norm() <= 1e-14 * (1.0 + rhs.norm())) break;
        v += ldlt.solve(res);
      }
      return v;
    };

    BlockVec gc = conj_w(cmat);
    const RVector agc = a_apply(gc);
    const double cgc = bdot(cmat, gc);

    // Direction solve for a given (sigma, corrector terms).
    // Newton system:
    //   A dx - b dtau                    = -rp
    //  -A' dy - ds + c dtau              = -rd
    //   c.dx - b.dy + dkappa             = -rg
    //   dx + W ds W                      = rc   (blocks)
    //   dkappa + (kappa/tau) dtau        = rk
    struct Dir {
      BlockVec dx, ds;
      RVector dy;
      double dtau = 0, dkappa = 0;
    };
    auto solve_dir = [&](const BlockVec &rc, double rk) {
      Dir d;
      // dx = G(A'dy - c dtau - rd) + rc
      BlockVec grd = conj_w(rd);
      RVector rhs1 = -rp;
      for (int i = 0; i < m; ++i)
        rhs1(i) += dot(p.rows[i], grd) - dot(p.rows[i], rc);
      RVector u1 = m > 0 ? schur_solve(rhs1) : RVector(0);
      RVector u2 = m > 0 ? schur_solve(RVector(agc + p.b)) : RVector(0);

      // tau equation: (w - b).dy - (cgc + kappa/tau) dtau = rhs2
      const double rhs2 =
          -rg + bdot(cmat, grd) - bdot(cmat, rc) - rk;
      RVector wmb = agc - p.b;
      const double denom = (m > 0 ? wmb.dot(u2) : 0.0) - cgc - r.kappa / r.tau;
      const double num = rhs2 - (m > 0 ? wmb.dot(u1) : 0.0);
      d.dtau = std::abs(denom) > 1e-300 ? num / denom : 0.0;
      d.dy = m > 0 ? RVector(u1 + d.dtau * u2) : RVector(0);

      BlockVec atdy = at_apply(d.dy);
      d.dx = zero_like(p.block_dims);
      d.ds = zero_like(p.block_dims);
      for (size_t k = 0; k < nb; ++k) {
        RMatrix inner = atdy[k] - d.dtau * cmat[k] - rd[k];
        d.dx[k] = w[k] * inner * w[k] + rc[k];
        d.dx[k] = 0.5 * (d.dx[k] + RMatrix(d.dx[k].transpose()));
      }
      // ds from the dual equation: ds = rd + c dtau - A' dy.
      for (size_t k = 0; k < nb; ++k)
        d.ds[k] = rd[k] + d.dtau * cmat[k] - atdy[k];
      d.dkappa = rk - (r.kappa / r.tau) * d.dtau;
      return d;
    };

    auto step_len = [&](const Dir &d) {
      double alpha = 1e30;
      for (size_t k = 0; k < nb; ++k) {
        alpha = std::min(alpha, max_step(r.x[k], d.dx[k]));
        alpha = std::min(alpha, max_step(r.s[k], d.ds[k]));
      }
      if (d.dtau < 0) alpha = std::min(alpha, -r.tau / d.dtau);
      if (d.dkappa < 0) alpha = std::min(alpha, -r.kappa / d.dkappa);
      return alpha;
    };

    // Predictor (sigma = 0): rc = -x, rk = -kappa.
    BlockVec rc0 = zero_like(p.block_dims);
    for (size_t k = 0; k < nb; ++k) rc0[k] = -r.x[k];
    Dir aff = solve_dir(rc0, -r.kappa);
    double alpha_aff = std::min(1.0, step_len(aff));

    // Centering parameter from the affine step.
    double gap_aff = 0.0;
    {
      BlockVec xa = r.x, sa = r.s;
      for (size_t k = 0; k < nb; ++k) {
        xa[k] += alpha_aff * aff.dx[k];
        sa[k] += alpha_aff * aff.ds[k];
      }
      gap_aff = bdot(xa, sa) + (r.tau + alpha_aff * aff.dtau) *
                                   (r.kappa + alpha_aff * aff.dkappa);
    }
    const double gap0 = xs + r.tau * r.kappa;
    double sigma = std::pow(std::max(0.0, gap_aff / gap0), 3.0);
    sigma = std::min(0.99, std::max(1e-4, sigma));

    // Combined step: rc = sigma*mu*S^{-1} - x, rk = (sigma*mu - tau*kappa)/tau.
    BlockVec rc = zero_like(p.block_dims);
    for (size_t k = 0; k < nb; ++k) {
      Eigen::LLT<RMatrix> ls(r.s[k]);
      RMatrix sinv = ls.solve(RMatrix::Identity(p.block_dims[k], p.block_dims[k]));
      rc[k] = sigma * mu * 0.5 * (sinv + RMatrix(sinv.transpose())) - r.x[k];
    }
    Dir dir = solve_dir(rc, (sigma * mu - r.tau * r.kappa) / r.tau);
    double alpha = std::min(1.0, 0.98 * step_len(dir));
    if (!(alpha > 1e-10)) break;  // no usable step; fall back to best iterate

    for (size_t k = 0; k < nb; ++k) {
      r.x[k] += alpha * dir.dx[k];
      r.s[k] += alpha * dir.ds[k];
      r.x[k] = 0.5 * (r.x[k] + RMatrix(r.x[k].transpose()));
      r.s[k] = 0.5 * (r.s[k] + RMatrix(r.s[k].transpose()));
    }
    r.y += alpha * dir.dy;
    r.tau += alpha * dir.dtau;
    r.kappa += alpha * dir.dkappa;
  }
  // Converged, stalled, or out of iterations: accept the best iterate if it
  // is within a small factor of the requested accuracy.
  best.status = best_score <= 10.0 * tol ? SdpStatus::kOptimal
                                         : SdpStatus::kNumericalFailure;
  if (best.status == SdpStatus::kOptimal && m > 0) {
    // Primal polish: least-squares projection of x onto {A x = tau b}. The
    // touched eigenvalues move by at most the primal residual, which is
    // within the reported accuracy.
    RMatrix gram(m, m);
    std::vector<BlockVec> amats(m);
    for (int i = 0; i < m; ++i) {
      amats[i] = zero_like(p.block_dims);
      for (const auto &[blk, mat] : p.rows[i].entries) amats[i][blk] += mat;
    }
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        gram(i, j) = gram(j, i) = bdot(amats[i], amats[j]);
    RVector rp = RVector::Zero(m);
    for (int i = 0; i < m; ++i) rp(i) = dot(p.rows[i], best.x) - best.tau * p.b(i);
    Eigen::LDLT<RMatrix> gl(gram);
    RVector lam = gl.solve(rp);
    lam += gl.solve(RVector(rp - gram * lam));
    for (int i = 0; i < m; ++i)
      for (size_t k = 0; k < nb; ++k) best.x[k] -= lam(i) * amats[i][k];
  }
  return best;
}

}  // namespace conic_detail

/// Complex-to-real symmetric embedding. Every variable dimension doubles and
/// all data become real; optima coincide with the source problem.
inline SdpProblem embed_complex(const SdpProblem &p) {
  SdpProblem out;
  out.sense = p.sense;
  for (const auto &v : p.variables)
    out.add_variable(v.name, 2 * v.dim);
  auto embed_half = [](const CMatrix &a) {
    return CMatrix(0.5 * conic_detail::embed(a).cast<Complex>());
  };
  for (const auto &eq : p.equalities) {
    Equality e;
    e.rhs = eq.rhs;
    for (const auto &t : eq.terms) e.terms.push_back({t.var, embed_half(t.coeff)});
    out.equalities.push_back(std::move(e));
  }
  for (const auto &pc : p.psd_constraints) {
    PsdConstraint c;
    c.constant = conic_detail::embed(pc.constant).cast<Complex>();
    c.terms = pc.terms;
    out.psd_constraints.push_back(std::move(c));
  }
  for (const auto &t : p.objective)
    out.objective.push_back({t.var, embed_half(t.coeff)});
  return out;
}

/// Solves the SDP. Status kOptimal guarantees duality gap and primal
/// residuals below tol; infeasible problems carry a Farkas certificate on the
/// equality multipliers.
inline SdpSolution solve_sdp(const SdpProblem &prob, double tol = 1e-9) {
  using namespace conic_detail;
  if (!(tol > 0)) throw std::invalid_argument("solve_sdp: tol must be positive");

  const int nvar = static_cast<int>(prob.variables.size());

  // Classify variables: a bare "X >= 0" constraint makes X a cone block.
  std::vector<int> cone_block(nvar, -1), pos_block(nvar, -1), neg_block(nvar, -1);
  std::vector<bool> consumed(prob.psd_constraints.size(), false);
  ConeProblem cp;
  for (size_t c = 0; c < prob.psd_constraints.size(); ++c) {
    const auto &pc = prob.psd_constraints[c];
    if (pc.terms.size() == 1 && pc.terms[0].second == 1.0 &&
        pc.constant.cwiseAbs().maxCoeff() == 0.0 &&
        cone_block[pc.terms[0].first] < 0) {
      cone_block[pc.terms[0].first] = static_cast<int>(cp.block_dims.size());
      cp.block_dims.push_back(prob.variables[pc.terms[0].first].dim);
      consumed[c] = true;
    }
  }
  for (int v = 0; v < nvar; ++v) {
    if (cone_block[v] >= 0) continue;
    pos_block[v] = static_cast<int>(cp.block_dims.size());
    cp.block_dims.push_back(prob.variables[v].dim);
    neg_block[v] = static_cast<int>(cp.block_dims.size());
    cp.block_dims.push_back(prob.variables[v].dim);
  }

  auto sym = [](const CMatrix &a) {
    RMatrix s = 0.5 * (a.real() + a.real().transpose());
    return s;
  };
  auto add_var_entry = [&](SparseRow &row, int var, const RMatrix &mat) {
    if (cone_block[var] >= 0) {
      row.entries.push_back({cone_block[var], mat});
    } else {
      row.entries.push_back({pos_block[var], mat});
      row.entries.push_back({neg_block[var], RMatrix(-mat)});
    }
  };

  // Scalar equalities.
  for (const auto &eq : prob.equalities) {
    SparseRow row;
    for (const auto &t : eq.terms) add_var_entry(row, t.var, sym(t.coeff));
    cp.rows.push_back(std::move(row));
  }
  RVector b(prob.equalities.size() +
            [&] {
              Eigen::Index extra = 0;
              for (size_t c = 0; c < prob.psd_constraints.size(); ++c)
                if (!consumed[c]) {
                  const Eigen::Index d = prob.psd_constraints[c].constant.rows();
                  extra += d * (d + 1) / 2;
                }
              return extra;
            }());
  for (size_t i = 0; i < prob.equalities.size(); ++i) b(i) = prob.equalities[i].rhs;
  Eigen::Index next_row = static_cast<Eigen::Index>(prob.equalities.size());

  // Remaining PSD constraints get slack blocks tied entrywise.
  struct SlackInfo { int block; size_t constraint; };
  for (size_t c = 0; c < prob.psd_constraints.size(); ++c) {
    if (consumed[c]) continue;
    const auto &pc = prob.psd_constraints[c];
    const Eigen::Index d = pc.constant.rows();
    const int slack = static_cast<int>(cp.block_dims.size());
    cp.block_dims.push_back(d);
    // For each symmetric basis element E: <E, sum terms> - <E, T> = -<E, G0>.
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j) {
        RMatrix e = RMatrix::Zero(d, d);
        e(i, j) = e(j, i) = (i == j) ? 1.0 : 0.5;
        SparseRow row;
        for (const auto &[var, scale] : pc.terms)
          add_var_entry(row, var, RMatrix(scale * e));
        row.entries.push_back({slack, RMatrix(-e)});
        cp.rows.push_back(std::move(row));
        b(next_row++) = -(e.array() * pc.constant.real().array()).sum();
      }
  }
  cp.b = b;

  // Objective (min convention).
  const double obj_sign = prob.sense == Sense::kMaximize ? -1.0 : 1.0;
  for (const auto &t : prob.objective)
    add_var_entry(cp.cost, t.var, RMatrix(obj_sign * sym(t.coeff)));

  // --- presolve: drop linearly dependent equality rows ----------------------
  SdpSolution sol;
  const int m_all = static_cast<int>(cp.rows.size());
  if (m_all == 0) {
    conic_detail::HsdResult hsd0 = conic_detail::solve_hsd(cp, tol);
    sol.status = hsd0.status;
    if (hsd0.status == SdpStatus::kOptimal) {
      for (int v = 0; v < nvar; ++v) {
        RMatrix z = cone_block[v] >= 0
                        ? RMatrix(hsd0.x[cone_block[v]] / hsd0.tau)
                        : RMatrix((hsd0.x[pos_block[v]] - hsd0.x[neg_block[v]]) /
                                  hsd0.tau);
        sol.values[prob.variables[v].name] = z.cast<Complex>();
      }
      sol.primal_objective = obj_sign * dot(cp.cost, hsd0.x) / hsd0.tau;
      sol.dual_objective = sol.primal_objective;
      sol.gap = 0.0;
    }
    return sol;
  }
  Eigen::Index ncols = 0;
  std::vector<Eigen::Index> block_off(cp.block_dims.size());
  for (size_t k = 0; k < cp.block_dims.size(); ++k) {
    block_off[k] = ncols;
    ncols += cp.block_dims[k] * cp.block_dims[k];
  }
  RMatrix adense = RMatrix::Zero(ncols, m_all);  // A^T
  for (int i = 0; i < m_all; ++i)
    for (const auto &[blk, mat] : cp.rows[i].entries) {
      Eigen::Map<const RVector> flat(mat.data(), mat.size());
      adense.col(i).segment(block_off[blk], mat.size()) += flat;
    }
  Eigen::ColPivHouseholderQR<RMatrix> qr(adense);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> keep, drop;
  {
    const auto &perm = qr.colsPermutation().indices();
    std::vector<bool> is_kept(m_all, false);
    for (int k = 0; k < rank; ++k) is_kept[perm(k)] = true;
    for (int i = 0; i < m_all; ++i)
      (is_kept[i] ? keep : drop).push_back(i);
  }

  if (!drop.empty()) {
    RMatrix akeep(ncols, rank);
    RVector bkeep(rank);
    for (int k = 0; k < rank; ++k) {
      akeep.col(k) = adense.col(keep[k]);
      bkeep(k) = cp.b(keep[k]);
    }
    Eigen::ColPivHouseholderQR<RMatrix> qrk(akeep);
    for (int i : drop) {
      RVector coeff = qrk.solve(adense.col(i));
      const double rhs_pred = coeff.dot(bkeep);
      if (std::abs(cp.b(i) - rhs_pred) > 1e-7 * (1.0 + std::abs(cp.b(i)))) {
        // Inconsistent dependent row: Farkas ray in the full multiplier space.
        sol.status = SdpStatus::kInfeasible;
        const double sign = cp.b(i) - rhs_pred > 0 ? 1.0 : -1.0;
        sol.infeasibility_certificate.assign(m_all, 0.0);
        sol.infeasibility_certificate[i] = sign;
        for (int k = 0; k < rank; ++k)
          sol.infeasibility_certificate[keep[k]] = -sign * coeff(k);
        return sol;
      }
    }
    ConeProblem reduced;
    reduced.block_dims = cp.block_dims;
    reduced.cost = cp.cost;
    reduced.b = bkeep;
    for (int k = 0; k < rank; ++k) reduced.rows.push_back(cp.rows[keep[k]]);
    cp = std::move(reduced);
  } else {
    keep.resize(m_all);
    for (int i = 0; i < m_all; ++i) keep[i] = i;
  }

  // --- solve -----------------------------------------------------------------
  HsdResult hsd = solve_hsd(cp, tol);
  sol.status = hsd.status;
  if (hsd.status == SdpStatus::kInfeasible) {
    sol.infeasibility_certificate.assign(m_all, 0.0);
    for (size_t k = 0; k < keep.size(); ++k)
      sol.infeasibility_certificate[keep[k]] = hsd.y(k);
    return sol;
  }
  if (hsd.status != SdpStatus::kOptimal && hsd.status != SdpStatus::kUnbounded)
    return sol;
  if (hsd.status == SdpStatus::kUnbounded) return sol;

  // Extract variable values (de-embed happens in the caller when needed).
  for (int v = 0; v < nvar; ++v) {
    RMatrix z;
    if (cone_block[v] >= 0)
      z = hsd.x[cone_block[v]] / hsd.tau;
    else
      z = (hsd.x[pos_block[v]] - hsd.x[neg_block[v]]) / hsd.tau;
    sol.values[prob.variables[v].name] = z.cast<Complex>();
  }
  double cx = 0.0, by = cp.b.dot(hsd.y);
  {
    conic_detail::BlockVec xs = hsd.x;
    cx = dot(cp.cost, xs) / hsd.tau;
  }
  sol.primal_objective = obj_sign * cx;
  sol.dual_objective = obj_sign * (by / hsd.tau);
  sol.gap = std::abs(sol.primal_objective - sol.dual_objective);
  return sol;
}

/// Solves a complex-variable SDP by embedding, then maps values back to
/// Hermitian matrices of the original dimensions.
inline SdpSolution solve_sdp_complex(const SdpProblem &prob, double tol = 1e-9) {
  SdpSolution sol = solve_sdp(embed_complex(prob), tol);
  if (sol.status != SdpStatus::kOptimal) return sol;
  for (const auto &v : prob.variables) {
    RMatrix z = sol.values[v.name].real();
    sol.values[v.name] = conic_detail::unembed(z);
  }
  return sol;
}

}  // namespace qrm

#endif  // QRM_CONIC_HPP
