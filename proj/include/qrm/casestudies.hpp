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
 * @file casestudies.hpp
 * @brief Concrete constructions: the theta-parametrized family of entangled
 * two-qubit bases (whose qubit marginals give a 4-outcome POVM that is
 * perfect for a quantum adversary yet not projectively simulable), and the
 * beam-splitter single-photon QRNG with inefficient detectors, including
 * the guessing-probability-versus-efficiency curve.
 */

#ifndef QRM_CASESTUDIES_HPP
#define QRM_CASESTUDIES_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrm/pguess.hpp"
#include "qrm/qobj.hpp"

namespace qrm {

/// Parameters of the entangled-basis family: the four sign vectors
/// (+-1, +-1, +-1) and the polar data of their unit directions.
struct EjmParams {
  double theta = 0.0;
  std::array<std::array<double, 3>, 4> m_vectors;
  std::array<double, 4> eta;  // z-component of the unit vector
  std::array<double, 4> phi;  // azimuth of the (x, y) components
};

inline EjmParams ejm_params(double theta) {
  if (!(theta >= 0.0 && theta <= M_PI / 2 + 1e-12))
    throw std::invalid_argument("ejm_params: theta outside [0, pi/2]");
  EjmParams p;
  p.theta = theta;
  p.m_vectors = {{{+1, +1, +1}, {+1, -1, -1}, {-1, +1, -1}, {-1, -1, +1}}};
  for (int b = 0; b < 4; ++b) {
    const auto &m = p.m_vectors[b];
    p.eta[b] = m[2] / std::sqrt(3.0);
    p.phi[b] = std::atan2(m[1], m[0]);
  }
  return p;
}

namespace casestudies_detail {

/// Spin coherent states along +-m for a unit vector with polar data
/// (eta = cos of polar angle, phi = azimuth).
inline CVector spinor_plus(double eta, double phi) {
  CVector v(2);
  v(0) = std::sqrt((1.0 + eta) / 2.0) * std::exp(Complex(0, -phi / 2));
  v(1) = std::sqrt((1.0 - eta) / 2.0) * std::exp(Complex(0, phi / 2));
  return v;
}

inline CVector spinor_minus(double eta, double phi) {
  CVector v(2);
  v(0) = std::sqrt((1.0 - eta) / 2.0) * std::exp(Complex(0, -phi / 2));
  v(1) = -std::sqrt((1.0 + eta) / 2.0) * std::exp(Complex(0, phi / 2));
  return v;
}

}  // namespace casestudies_detail

/// The entangled two-qubit basis
/// |Phi_b(theta)> = (sqrt(3) + e^{i theta})/(2 sqrt(2)) |m_b, -m_b>
///                + (sqrt(3) - e^{i theta})/(2 sqrt(2)) |-m_b, m_b>.
inline std::vector<CVector> ejm_basis(double theta) {
  const EjmParams p = ejm_params(theta);
  const Complex cp = (std::sqrt(3.0) + std::exp(Complex(0, theta))) /
                     (2.0 * std::sqrt(2.0));
  const Complex cm = (std::sqrt(3.0) - std::exp(Complex(0, theta))) /
                     (2.0 * std::sqrt(2.0));
  std::vector<CVector> basis;
  for (int b = 0; b < 4; ++b) {
    CVector up = casestudies_detail::spinor_plus(p.eta[b], p.phi[b]);
    CVector dn = casestudies_detail::spinor_minus(p.eta[b], p.phi[b]);
    basis.push_back(cp * kron_vec(up, dn) + cm * kron_vec(dn, up));
  }
  return basis;
}

/// The qubit 4-outcome POVM with effects M^x = Tr_A[|Phi_x><Phi_x|]/2.
inline Povm ejm_povm(double theta) {
  std::vector<CMatrix> eff;
  for (const CVector &v : ejm_basis(theta))
    eff.push_back(0.5 * partial_trace(projector(v), {2, 2}, {1}));
  return Povm(std::move(eff));
}

/// Beam-splitter QRNG: a single photon split across two paths, each watched
/// by a detector of efficiency mu. Paths are truncated to photon numbers
/// {0, 1}, which is exact for this source.
struct QrngModel {
  double mu = 0.0;
  QState state;   // on path1 (x) path2, dim 4
  Povm povm;      // outcomes ordered (00, 01, 10, 11)
  ProjImpl impl;  // projective implementation with one ancilla mode per path
};

inline QrngModel qrng_model(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw std::invalid_argument("qrng_model: mu outside [0, 1]");
  QrngModel model;
  model.mu = mu;

  const CVector k0 = basis_ket(2, 0), k1 = basis_ket(2, 1);
  CVector psi = (kron_vec(k1, k0) + kron_vec(k0, k1)) / std::sqrt(2.0);
  model.state = QState(projector(psi));

  const CMatrix one = projector(k1);
  const CMatrix m1 = mu * one;            // detector fires
  const CMatrix m0 = identity(2) - m1;    // detector silent
  model.povm = Povm({kron(m0, m0), kron(m0, m1), kron(m1, m0), kron(m1, m1)},
                    {"00", "01", "10", "11"});

  // Projective implementation: each path D gets an ancilla mode D' in the
  // state (1 - mu)|0><0| + mu|1><1|; the detector projector is
  // Pi^1 = |1><1|_D (x) |1><1|_{D'}. Subsystem order is built as
  // (1, 1', 2, 2') and permuted to the system-ancilla split (1, 2, 1', 2').
  const CMatrix pi1 = kron(one, one);
  const CMatrix pi0 = identity(4) - pi1;
  const std::vector<Eigen::Index> dims{2, 2, 2, 2};
  const std::vector<int> perm{0, 2, 1, 3};  // (1,1',2,2') -> (1,2,1',2')
  auto proj = [&](const CMatrix &a, const CMatrix &b) {
    return permute_subsystems(CMatrix(kron(a, b)), dims, perm);
  };
  model.impl.system_dim = 4;
  model.impl.ancilla_dim = 4;
  model.impl.projectors = {proj(pi0, pi0), proj(pi0, pi1), proj(pi1, pi0),
                           proj(pi1, pi1)};
  CMatrix sigma = (1.0 - mu) * projector(k0) + mu * one;
  model.impl.ancilla_state = QState(kron(sigma, sigma));
  return model;
}

/// Adversary guessing probability when the projective implementation of the
/// QRNG is fixed: purify the joint state of paths and ancilla modes, steer
/// the purifying system by the projective measurement, and discriminate.
inline double f_of_mu(double mu, double tol = default_solver_tol()) {
  QrngModel model = qrng_model(mu);
  CMatrix rho_full = kron(model.state.rho, model.impl.ancilla_state.rho);
  CVector psi = purify(QState(rho_full));
  const Eigen::Index dsa = 16;
  const Eigen::Index de = psi.size() / dsa;
  const CMatrix full = projector(psi);
  std::vector<CMatrix> taus;
  for (const CMatrix &p : model.impl.projectors)
    taus.push_back(
        partial_trace(CMatrix(kron(p, identity(de)) * full), {dsa, de}, {0}));
  return discriminate_ensemble(taus, tol).value;
}

/// Adversary guessing probability over all implementations of the POVM,
/// computed by the pure-state SDP (tight for pure inputs).
inline double pq_of_mu(double mu, double tol = default_solver_tol()) {
  QrngModel model = qrng_model(mu);
  return pguess_pure_povm(model.state, model.povm, tol).value;
}

struct CurveRow {
  double mu = 0.0;
  double f_mu = 0.0;
  double pguess_q = 0.0;
};

/// Default efficiency grid: 0 to 1 in steps of 0.05.
inline std::vector<double> default_mu_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k * 0.05);
  return grid;
}

inline std::vector<CurveRow> qrng_curve(const std::vector<double> &grid,
                                        double tol = default_solver_tol()) {
  std::vector<CurveRow> rows;
  for (double mu : grid) rows.push_back({mu, f_of_mu(mu, tol), pq_of_mu(mu, tol)});
  return rows;
}

/// CSV serialization: header "mu,f_mu,pguess_q", 9 significant digits.
inline std::string qrng_curve_csv(const std::vector<CurveRow> &rows) {
  std::string out = "mu,f_mu,pguess_q\n";
  char buf[128];
  for (const CurveRow &r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", r.mu, r.f_mu,
                  r.pguess_q);
    out += buf;
  }
  return out;
}

}  // namespace qrm

#endif  // QRM_CASESTUDIES_HPP
