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

#include "qrm/matcore.hpp"
#include "test_util.hpp"

using namespace qrm;
using testutil::Rng;

namespace {
CMatrix diag2(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

const CMatrix kSigmaX = [] {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1;
  m(1, 0) = 1;
  return m;
}();

const CMatrix kSigmaZ = diag2(1, -1);
}  // namespace

TEST_CASE("kron: diagonal and identity cases") {
  CMatrix a = kron(diag2(1, -1), identity(2));
  CHECK(a(0, 0).real() == doctest::Approx(1));
  CHECK(a(1, 1).real() == doctest::Approx(1));
  CHECK(a(2, 2).real() == doctest::Approx(-1));
  CHECK(a(3, 3).real() == doctest::Approx(-1));
  CHECK((kron(identity(2), identity(2)) - identity(4)).norm() == 0.0);
}

TEST_CASE("kron: trace multiplicativity and bilinearity/associativity") {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    CMatrix a = testutil::random_hermitian(rng, 3);
    CMatrix b = testutil::random_hermitian(rng, 2);
    CMatrix c = testutil::random_hermitian(rng, 2);
    CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) < 1e-12);
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff() <
          1e-12);
    CMatrix a2 = testutil::random_hermitian(rng, 3);
    CHECK((kron(CMatrix(a + a2), b) - kron(a, b) - kron(a2, b))
              .cwiseAbs().maxCoeff() < 1e-12);
    CHECK((kron(CMatrix(2.0 * a), b) - 2.0 * kron(a, b)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("partial_trace: product states and trace preservation") {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    CMatrix a = testutil::random_hermitian(rng, 2);
    CMatrix b = testutil::random_hermitian(rng, 3);
    CMatrix pt = partial_trace(kron(a, b), {2, 3}, {1});
    CHECK((pt - b.trace() * a).cwiseAbs().maxCoeff() < 1e-12);
    CMatrix pt0 = partial_trace(kron(a, b), {2, 3}, {0});
    CHECK((pt0 - a.trace() * b).cwiseAbs().maxCoeff() < 1e-12);

    CMatrix full = testutil::random_hermitian(rng, 6);
    CHECK(std::abs(partial_trace(full, {2, 3}, {0}).trace() - full.trace()) <
          1e-12);
  }
}

TEST_CASE("partial_trace: Bell projector marginals") {
  CVector bell = (kron_vec(basis_ket(2, 0), basis_ket(2, 0)) +
                  kron_vec(basis_ket(2, 1), basis_ket(2, 1))) /
                 std::sqrt(2.0);
  CMatrix p = projector(bell);
  for (int side : {0, 1}) {
    CMatrix m = partial_trace(p, {2, 2}, {side});
    CHECK((m - 0.5 * identity(2)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("partial_trace: three-party factorization patterns") {
  Rng rng(13);
  CMatrix a = testutil::random_hermitian(rng, 2);
  CMatrix b = testutil::random_hermitian(rng, 2);
  CMatrix c = testutil::random_hermitian(rng, 3);
  CMatrix abc = kron(kron(a, b), c);
  CHECK((partial_trace(abc, {2, 2, 3}, {1, 2}) - b.trace() * c.trace() * a)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((partial_trace(abc, {2, 2, 3}, {0, 2}) - a.trace() * c.trace() * b)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((partial_trace(abc, {2, 2, 3}, {1}) -
         b.trace() * kron(a, c)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("permute_subsystems: swap matches kron swap") {
  Rng rng(17);
  CMatrix a = testutil::random_hermitian(rng, 2);
  CMatrix b = testutil::random_hermitian(rng, 3);
  CMatrix sw = permute_subsystems(kron(a, b), {2, 3}, {1, 0});
  CHECK((sw - kron(b, a)).cwiseAbs().maxCoeff() < 1e-12);

  CVector u = testutil::random_pure(rng, 2), v = testutil::random_pure(rng, 3);
  CVector swv = permute_subsystems(CVector(kron_vec(u, v)), {2, 3}, {1, 0});
  CHECK((swv - kron_vec(v, u)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigh: spectra and reconstruction") {
  auto ex = eigh(kSigmaX);
  CHECK(ex.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(ex.eigenvalues(1) == doctest::Approx(-1.0));

  auto e4 = eigh(identity(4));
  for (int k = 0; k < 4; ++k) CHECK(e4.eigenvalues(k) == doctest::Approx(1.0));

  CMatrix d3 = CMatrix::Zero(3, 3);
  d3(0, 0) = 3; d3(1, 1) = 1; d3(2, 2) = 2;
  auto ed = eigh(d3);
  CHECK(ed.eigenvalues(0) == doctest::Approx(3));
  CHECK(ed.eigenvalues(1) == doctest::Approx(2));
  CHECK(ed.eigenvalues(2) == doctest::Approx(1));

  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    Eigen::Index d = 2 + (t % 15);
    CMatrix h = testutil::random_hermitian(rng, d);
    auto e = eigh(h);
    CMatrix rec = e.eigenvectors *
                  e.eigenvalues.asDiagonal().toDenseMatrix().cast<Complex>() *
                  e.eigenvectors.adjoint();
    CHECK((rec - h).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(is_unitary(e.eigenvectors, 1e-10));
  }
  CHECK_THROWS(eigh(CMatrix(kSigmaX + CMatrix::Constant(2, 2, Complex(0, 1)))));
}

TEST_CASE("psd_sqrt: diagonal, scalar, projector, random") {
  CHECK((psd_sqrt(diag2(4, 9)) - diag2(2, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((psd_sqrt(CMatrix(0.5 * identity(2))) -
         identity(2) / std::sqrt(2.0)).cwiseAbs().maxCoeff() < 1e-12);

  Rng rng(29);
  CVector v = testutil::random_pure(rng, 3);
  CMatrix p = projector(v);
  CHECK((psd_sqrt(p) - p).cwiseAbs().maxCoeff() < 1e-10);

  for (int t = 0; t < 100; ++t) {
    Eigen::Index d = 2 + (t % 7);
    CMatrix h = testutil::random_psd(rng, d);
    CMatrix r = psd_sqrt(h);
    CHECK(is_psd(r, 1e-9));
    CHECK((r * r - h).cwiseAbs().maxCoeff() < 1e-10 * (1 + h.norm()));
  }
  CHECK_THROWS(psd_sqrt(diag2(1, -1)));
}

TEST_CASE("unitary_completion") {
  CMatrix col = CMatrix::Zero(4, 1);
  col(0, 0) = 1;
  CMatrix u = unitary_completion(col);
  CHECK((u.col(0) - col.col(0)).norm() == 0.0);
  CHECK(is_unitary(u, 1e-10));

  Rng rng(31);
  CMatrix full = testutil::random_unitary(rng, 4);
  CHECK((unitary_completion(full) - full).cwiseAbs().maxCoeff() < 1e-12);

  for (int t = 0; t < 20; ++t) {
    Eigen::Index d = 3 + (t % 6);
    Eigen::Index k = 1 + (t % d);
    CMatrix iso = testutil::random_isometry(rng, d, k);
    CMatrix w = unitary_completion(iso);
    CHECK((w.leftCols(k) - iso).cwiseAbs().maxCoeff() == 0.0);
    CHECK((w.adjoint() * w - identity(d)).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS(unitary_completion(CMatrix(2 * identity(3))));
}

TEST_CASE("trace_norm") {
  CHECK(trace_norm(kSigmaZ) == doctest::Approx(2.0));
  CHECK(trace_norm(CMatrix::Zero(3, 3)) == doctest::Approx(0.0));
  Rng rng(37);
  for (int t = 0; t < 10; ++t) {
    CMatrix rho = testutil::random_density(rng, 4);
    CHECK(trace_norm(rho) == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Non-Hermitian path goes through singular values.
  CMatrix n = CMatrix::Zero(2, 2);
  n(0, 1) = 3.0;
  CHECK(trace_norm(n) == doctest::Approx(3.0));
}
