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
 * @file json_io.hpp
 * @brief JSON (de)serialization for matrices, states, POVMs, strategies and
 *        result reports.
 *
 * Schema: a complex matrix is {"dim": [r, c], "re": [[...]], "im": [[...]]}
 * with separate real and imaginary coefficient arrays; a POVM is
 * {"dim": n, "effects": [matrix, ...], "labels": [...]} where n is the
 * Hilbert-space dimension. Vectors are matrices with a single column.
 */

#ifndef QRM_JSON_IO_HPP
#define QRM_JSON_IO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrm/pguess.hpp"
#include "qrm/pmsim.hpp"
#include "qrm/qobj.hpp"

namespace qrm {

using Json = nlohmann::json;

inline Json matrix_to_json(const CMatrix &m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rrow = Json::array(), irow = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return Json{{"dim", {m.rows(), m.cols()}}, {"re", std::move(re)},
              {"im", std::move(im)}};
}

inline Json vector_to_json(const CVector &v) {
  return matrix_to_json(CMatrix(v));
}

inline CMatrix matrix_from_json(const Json &j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re"))
    throw std::invalid_argument("matrix_from_json: missing dim/re fields");
  const auto dim = j.at("dim");
  if (!dim.is_array() || dim.size() != 2)
    throw std::invalid_argument("matrix_from_json: dim must be [rows, cols]");
  const Eigen::Index r = dim.at(0).get<Eigen::Index>();
  const Eigen::Index c = dim.at(1).get<Eigen::Index>();
  if (r < 0 || c < 0)
    throw std::invalid_argument("matrix_from_json: negative dimension");
  const Json &re = j.at("re");
  const Json *im = j.contains("im") && !j.at("im").is_null() ? &j.at("im")
                                                             : nullptr;
  auto coeff = [&](const Json &arr, Eigen::Index i, Eigen::Index k) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != r ||
        !arr.at(i).is_array() ||
        static_cast<Eigen::Index>(arr.at(i).size()) != c)
      throw std::invalid_argument("matrix_from_json: ragged coefficient array");
    return arr.at(i).at(k).get<double>();
  };
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k)
      m(i, k) = Complex(coeff(re, i, k), im ? coeff(*im, i, k) : 0.0);
  return m;
}

inline CVector vector_from_json(const Json &j) {
  CMatrix m = matrix_from_json(j);
  if (m.cols() != 1)
    throw std::invalid_argument("vector_from_json: expected a single column");
  return CVector(m.col(0));
}

inline Json povm_to_json(const Povm &m) {
  Json effects = Json::array();
  for (const CMatrix &e : m.effects) effects.push_back(matrix_to_json(e));
  return Json{{"dim", m.dim}, {"effects", std::move(effects)},
              {"labels", m.labels}};
}

inline Povm povm_from_json(const Json &j) {
  if (!j.is_object() || !j.contains("effects"))
    throw std::invalid_argument("povm_from_json: missing effects");
  std::vector<CMatrix> effects;
  for (const Json &e : j.at("effects")) effects.push_back(matrix_from_json(e));
  Povm m = j.contains("labels") && !j.at("labels").is_null()
               ? Povm(std::move(effects),
                      j.at("labels").get<std::vector<std::string>>())
               : Povm(std::move(effects));
  if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != m.dim)
    throw std::invalid_argument("povm_from_json: declared dim mismatch");
  return m;
}

inline Json state_to_json(const QState &s) { return matrix_to_json(s.rho); }

inline QState state_from_json(const Json &j) {
  return QState(matrix_from_json(j));
}

inline Json strategy_to_json(const ClassicalStrategy &s) {
  Json branches = Json::array();
  for (const ClassicalBranch &b : s.branches) {
    Json effects = Json::array();
    for (const CMatrix &e : b.effects) effects.push_back(matrix_to_json(e));
    branches.push_back(Json{{"weight", b.weight},
                            {"phi", vector_to_json(b.phi)},
                            {"effects", std::move(effects)},
                            {"guess", b.guess}});
  }
  return Json{{"branches", std::move(branches)}};
}

inline ClassicalStrategy strategy_from_json(const Json &j) {
  if (!j.is_object() || !j.contains("branches"))
    throw std::invalid_argument("strategy_from_json: missing branches");
  ClassicalStrategy s;
  for (const Json &jb : j.at("branches")) {
    ClassicalBranch b;
    b.weight = jb.at("weight").get<double>();
    b.phi = vector_from_json(jb.at("phi"));
    for (const Json &e : jb.at("effects"))
      b.effects.push_back(matrix_from_json(e));
    b.guess = jb.at("guess").get<int>();
    s.branches.push_back(std::move(b));
  }
  return s;
}

inline std::string to_string(GuessKind k) {
  switch (k) {
    case GuessKind::kExactSdp:
      return "exact_sdp";
    case GuessKind::kStrategyLowerBound:
      return "strategy_lower_bound";
    case GuessKind::kCertificate:
      return "certificate";
  }
  return "unknown";
}

inline Json report_to_json(const GuessReport &r) {
  Json j{{"value", r.value}, {"kind", to_string(r.kind)},
         {"residuals", r.residuals}};
  if (r.strategy) j["strategy"] = strategy_to_json(*r.strategy);
  return j;
}

inline Json visibility_to_json(const VisibilityResult &v) {
  Json pairs = Json::array();
  for (const PmPair &p : v.pairs)
    pairs.push_back(Json{{"i", p.i},
                         {"j", p.j},
                         {"weight", p.weight},
                         {"effect_i", matrix_to_json(p.effect_i)},
                         {"effect_j", matrix_to_json(p.effect_j)}});
  Json j{{"t_star", v.t_star}, {"pairs", std::move(pairs)}};
  j["dual_certificate"] =
      v.dual_certificate ? Json(*v.dual_certificate) : Json(nullptr);
  return j;
}

inline Json certificate_to_json(const PcCertificate &c) {
  Json j{{"applicable", c.applicable},
         {"certified", c.certified},
         {"t_star", c.t_star}};
  j["dual_certificate"] =
      c.dual_certificate ? Json(*c.dual_certificate) : Json(nullptr);
  return j;
}

}  // namespace qrm

#endif  // QRM_JSON_IO_HPP
