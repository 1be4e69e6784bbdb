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
 * @file matcore.hpp
 * @brief Dense complex linear algebra for small operator-valued computations:
 *        tensor products, partial traces, Hermitian eigendecomposition, PSD
 *        square roots and unitary completion.
 *
 * Subsystems are always indexed left-to-right in tensor products; every
 * dimension list in this library follows that convention.
 */

#ifndef QRM_MATCORE_HPP
#define QRM_MATCORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

namespace qrm {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Default tolerance for validity predicates; callers may override per call.
inline constexpr double kDefaultTol = 1e-9;

inline CMatrix dag(const CMatrix &m) { return m.adjoint(); }

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

/// Computational basis column vector |k> in dimension d.
inline CVector basis_ket(Eigen::Index d, Eigen::Index k) {
  CVector v = CVector::Zero(d);
  v(k) = 1.0;
  return v;
}

inline CMatrix projector(const CVector &v) { return v * v.adjoint(); }

inline bool is_hermitian(const CMatrix &m, double tol = kDefaultTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_psd(const CMatrix &m, double tol = kDefaultTol) {
  if (!is_hermitian(m, tol)) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(
      CMatrix(0.5 * (m + m.adjoint())), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

inline bool is_unitary(const CMatrix &m, double tol = kDefaultTol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - identity(m.rows())).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_projector(const CMatrix &m, double tol = kDefaultTol) {
  return is_hermitian(m, tol) &&
         (m * m - m).cwiseAbs().maxCoeff() <= tol;
}

/// Kronecker product a ⊗ b.
inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix kron(const std::vector<CMatrix> &factors) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto &f : factors) out = kron(out, f);
  return out;
}

inline CVector kron_vec(const CVector &a, const CVector &b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

namespace detail {

inline void check_dims(const CMatrix &m, const std::vector<Eigen::Index> &dims) {
  Eigen::Index prod = 1;
  for (auto d : dims) prod *= d;
  if (m.rows() != m.cols() || m.rows() != prod)
    throw std::invalid_argument("subsystem dimensions do not match matrix");
}

// Row-major strides of a multi-index over `dims`.
inline std::vector<Eigen::Index> strides(const std::vector<Eigen::Index> &dims) {
  std::vector<Eigen::Index> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k)
    s[k] = s[k + 1] * dims[k + 1];
  return s;
}

}  // namespace detail

/// Trace out the subsystems listed in `traced` (0-based, left-to-right).
inline CMatrix partial_trace(const CMatrix &m,
                             const std::vector<Eigen::Index> &dims,
                             const std::set<int> &traced) {
  detail::check_dims(m, dims);
  const int n = static_cast<int>(dims.size());
  std::vector<int> kept;
  for (int k = 0; k < n; ++k)
    if (!traced.count(k)) kept.push_back(k);

  const auto str = detail::strides(dims);
  Eigen::Index dkept = 1, dtr = 1;
  for (int k : kept) dkept *= dims[k];
  for (int k : traced) dtr *= dims[k];

  // Flat index of kept/traced multi-indices into the original space.
  auto embed = [&](Eigen::Index flat, const std::vector<int> &subs) {
    Eigen::Index idx = 0;
    for (int k = static_cast<int>(subs.size()) - 1; k >= 0; --k) {
      idx += (flat % dims[subs[k]]) * str[subs[k]];
      flat /= dims[subs[k]];
    }
    return idx;
  };
  std::vector<int> trvec(traced.begin(), traced.end());

  CMatrix out = CMatrix::Zero(dkept, dkept);
  for (Eigen::Index i = 0; i < dkept; ++i) {
    const Eigen::Index ri = embed(i, kept);
    for (Eigen::Index j = 0; j < dkept; ++j) {
      const Eigen::Index rj = embed(j, kept);
      Complex acc = 0.0;
      for (Eigen::Index t = 0; t < dtr; ++t) {
        const Eigen::Index rt = embed(t, trvec);
        acc += m(ri + rt, rj + rt);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

/// Reorder tensor factors: entry `perm[k]` names the original subsystem that
/// ends up in slot k of the output.
inline CMatrix permute_subsystems(const CMatrix &m,
                                  const std::vector<Eigen::Index> &dims,
                                  const std::vector<int> &perm) {
  detail::check_dims(m, dims);
  const int n = static_cast<int>(dims.size());
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permutation length mismatch");
  const auto str = detail::strides(dims);
  std::vector<Eigen::Index> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  const auto new_str = detail::strides(new_dims);

  const Eigen::Index d = m.rows();
  std::vector<Eigen::Index> map(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index out = 0;
    for (int k = 0; k < n; ++k)
      out += ((i / str[perm[k]]) % dims[perm[k]]) * new_str[k];
    map[i] = out;
  }
  CMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(map[i], map[j]) = m(i, j);
  return out;
}

inline CVector permute_subsystems(const CVector &v,
                                  const std::vector<Eigen::Index> &dims,
                                  const std::vector<int> &perm) {
  const int n = static_cast<int>(dims.size());
  const auto str = detail::strides(dims);
  std::vector<Eigen::Index> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  const auto new_str = detail::strides(new_dims);
  CVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Eigen::Index o = 0;
    for (int k = 0; k < n; ++k)
      o += ((i / str[perm[k]]) % dims[perm[k]]) * new_str[k];
    out(o) = v(i);
  }
  return out;
}

struct Eigh {
  RVector eigenvalues;  // descending
  CMatrix eigenvectors; // columns, matching order
};

/// Hermitian eigendecomposition with eigenvalues sorted descending.
inline Eigh eigh(const CMatrix &h, double tol = kDefaultTol) {
  if (!is_hermitian(h, tol))
    throw std::invalid_argument("eigh: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(0.5 * (h + h.adjoint())));
  const Eigen::Index d = h.rows();
  Eigh out;
  out.eigenvalues = RVector(d);
  out.eigenvectors = CMatrix(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.eigenvalues(k) = es.eigenvalues()(d - 1 - k);
    out.eigenvectors.col(k) = es.eigenvectors().col(d - 1 - k);
  }
  return out;
}

/// Square root of a PSD matrix. Eigenvalues in [-tol, 0) are clipped to zero.
inline CMatrix psd_sqrt(const CMatrix &h, double tol = kDefaultTol) {
  const Eigh e = eigh(h, tol);
  if (e.eigenvalues.minCoeff() < -tol)
    throw std::invalid_argument("psd_sqrt: matrix has a negative eigenvalue");
  RVector s = e.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return e.eigenvectors * s.asDiagonal() * e.eigenvectors.adjoint();
}

/// Completes an isometry (orthonormal columns) to a square unitary whose
/// leading columns equal the input exactly.
inline CMatrix unitary_completion(const CMatrix &isometry,
                                  double tol = kDefaultTol) {
  const Eigen::Index d = isometry.rows(), k = isometry.cols();
  if (k > d) throw std::invalid_argument("unitary_completion: too many columns");
  if ((isometry.adjoint() * isometry - identity(k)).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("unitary_completion: columns not orthonormal");
  CMatrix u(d, d);
  u.leftCols(k) = isometry;
  // Gram-Schmidt the standard basis against the given columns.
  Eigen::Index filled = k;
  for (Eigen::Index c = 0; c < d && filled < d; ++c) {
    CVector v = basis_ket(d, c);
    for (int pass = 0; pass < 2; ++pass)
      v -= u.leftCols(filled) * (u.leftCols(filled).adjoint() * v);
    const double nrm = v.norm();
    if (nrm > 1e-8) u.col(filled++) = v / nrm;
  }
  if (filled != d)
    throw std::runtime_error("unitary_completion: could not complete basis");
  return u;
}

/// Sum of singular values (eigenvalue path when Hermitian).
inline double trace_norm(const CMatrix &m) {
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12))
    return eigh(m).eigenvalues.cwiseAbs().sum();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

/// Largest-magnitude eigenvalue of a Hermitian matrix.
inline double spectral_norm_herm(const CMatrix &m) {
  if (m.size() == 0) return 0.0;
  return eigh(m, 1e-6).eigenvalues.cwiseAbs().maxCoeff();
}

}  // namespace qrm

#endif  // QRM_MATCORE_HPP
