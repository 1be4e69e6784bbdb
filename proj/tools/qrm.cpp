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
 * @file qrm.cpp
 * @brief Command-line interface to the qrmeas library.
 *
 * Subcommands:
 *   ejm               emit the elegant-joint-measurement basis and marginal
 *                     POVM for a given --theta
 *   pmsim             read a POVM (--in) and report its projective
 *                     simulability visibility
 *   pguess            read {"state": ..., "povm": ..., ["strategy": ...]}
 *                     (--in) and report the adversary's guessing probability
 *   qrng-curve        emit the detector-noise curve (f(mu), p_guess^Q(mu))
 *   certify-theorem4  run the four-outcome qubit separation pipeline
 *   selftest          run fast built-in oracle checks
 *
 * Exit codes: 0 success, 1 validation failure, 2 solver failure. Failures
 * emit a machine-readable error JSON on stderr.
 */

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrm/casestudies.hpp"
#include "qrm/json_io.hpp"
#include "qrm/pguess.hpp"
#include "qrm/pmsim.hpp"

namespace {

using qrm::Json;

void emit(const std::string &text, const std::string &out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
  out << text;
}

void emit_json(const Json &j, const std::string &out_path) {
  emit(j.dump(2) + "\n", out_path);
}

Json read_json(const std::string &in_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open input file: " + in_path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception &e) {
    throw std::invalid_argument(std::string("invalid JSON input: ") +
                                e.what());
  }
  return j;
}

std::string first_failure(const qrm::ValidationReport &v) {
  for (const auto &item : v.items)
    if (!item.pass) return item.name;
  return "unknown";
}

std::vector<double> parse_grid(const std::string &spec) {
  double a = 0.0, b = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
      !(step > 0.0) || b < a)
    throw std::invalid_argument("--mu-grid must be a:b:step with step > 0");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double mu = a + k * step;
    if (mu > b + 1e-12) break;
    grid.push_back(std::min(mu, b));
  }
  return grid;
}

int run_ejm(double theta, const std::string &out_path) {
  std::vector<qrm::CVector> basis = qrm::ejm_basis(theta);
  Json jbasis = Json::array();
  for (const qrm::CVector &v : basis) jbasis.push_back(qrm::vector_to_json(v));
  Json j{{"theta", theta},
         {"basis", std::move(jbasis)},
         {"povm", qrm::povm_to_json(qrm::ejm_povm(theta))}};
  emit_json(j, out_path);
  return 0;
}

int run_pmsim(const std::string &in_path, double tol,
              const std::string &out_path) {
  if (in_path.empty())
    throw std::invalid_argument("pmsim requires --in <povm.json>");
  qrm::Povm m = qrm::povm_from_json(read_json(in_path));
  qrm::ValidationReport v = qrm::validate(m);
  if (!v.ok)
    throw std::invalid_argument("invalid POVM: " + first_failure(v));
  emit_json(qrm::visibility_to_json(qrm::pm_visibility(m, tol)), out_path);
  return 0;
}

int run_pguess(const std::string &in_path, double tol,
               const std::string &out_path) {
  if (in_path.empty())
    throw std::invalid_argument("pguess requires --in <problem.json>");
  Json j = read_json(in_path);
  if (!j.is_object() || !j.contains("state") || !j.contains("povm"))
    throw std::invalid_argument("pguess input must contain state and povm");
  qrm::QState rho = qrm::state_from_json(j.at("state"));
  qrm::Povm m = qrm::povm_from_json(j.at("povm"));
  for (const auto &v : {qrm::validate(rho), qrm::validate(m)})
    if (!v.ok) throw std::invalid_argument("invalid input: " + first_failure(v));

  qrm::GuessReport rep;
  std::string route;
  if (j.contains("strategy") && !j.at("strategy").is_null()) {
    rep = qrm::eval_classical_strategy(
        qrm::strategy_from_json(j.at("strategy")), rho, m);
    route = "strategy_evaluation";
  } else if (qrm::pguess_detail::is_projective(m, 1e-7)) {
    rep = qrm::pguess_pm_classical(rho, m, tol);
    route = "projective_measurement";
  } else {
    // The pure-state SDP route; rejects mixed states with a clear message.
    rep = qrm::pguess_pure_povm(rho, m, tol);
    route = "pure_state_povm";
  }
  Json out = qrm::report_to_json(rep);
  out["route"] = route;
  emit_json(out, out_path);
  return 0;
}

int run_qrng_curve(const std::string &grid_spec, double tol,
                   const std::string &format, const std::string &out_path) {
  std::vector<double> grid =
      grid_spec.empty() ? qrm::default_mu_grid() : parse_grid(grid_spec);
  for (double mu : grid)
    if (!(mu >= 0.0 && mu <= 1.0))
      throw std::invalid_argument("--mu-grid values must lie in [0, 1]");
  std::vector<qrm::CurveRow> rows = qrm::qrng_curve(grid, tol);
  if (format == "csv") {
    emit(qrm::qrng_curve_csv(rows), out_path);
  } else if (format == "json") {
    Json j = Json::array();
    for (const qrm::CurveRow &r : rows)
      j.push_back(Json{{"mu", r.mu}, {"f_mu", r.f_mu},
                       {"pguess_q", r.pguess_q}});
    emit_json(j, out_path);
  } else {
    throw std::invalid_argument("--format must be json or csv");
  }
  return 0;
}

int run_certify(double tol, const std::string &out_path) {
  qrm::Povm m = qrm::ejm_povm(0.0);
  qrm::PerfectConstruction pc =
      qrm::perfect_quantum_construction(qrm::ejm_basis(0.0));
  qrm::GuessReport q =
      qrm::eval_quantum_strategy(pc.strategy, pc.rho, pc.povm, 1e-9);
  qrm::VisibilityResult vis = qrm::pm_visibility(m, tol);
  qrm::PcCertificate cert = qrm::certify_pc_below_one(m);
  const bool separated = q.value >= 1.0 - 1e-6 && cert.certified;
  Json j{{"povm", qrm::povm_to_json(m)},
         {"quantum_value", q.value},
         {"quantum_residuals", q.residuals},
         {"visibility", qrm::visibility_to_json(vis)},
         {"certificate", qrm::certificate_to_json(cert)},
         {"separated", separated}};
  emit_json(j, out_path);
  return separated ? 0 : 2;
}

int run_selftest(double tol) {
  int failures = 0;
  auto check = [&](const std::string &name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  // Minimum-error discrimination of |0> vs |+> (Helstrom value).
  qrm::CVector plus =
      (qrm::basis_ket(2, 0) + qrm::basis_ket(2, 1)) / std::sqrt(2.0);
  const double hel =
      qrm::discriminate_ensemble(
          {0.5 * qrm::projector(qrm::CVector(qrm::basis_ket(2, 0))),
           0.5 * qrm::projector(plus)},
          tol)
          .value;
  check("helstrom |0> vs |+>",
        std::abs(hel - (0.5 + 0.25 * std::sqrt(2.0))) <= 1e-7);

  // Classical adversary guesses a projective measurement of I/2 perfectly.
  qrm::Povm comp({qrm::projector(qrm::CVector(qrm::basis_ket(2, 0))),
                  qrm::projector(qrm::CVector(qrm::basis_ket(2, 1)))});
  const double pc =
      qrm::pguess_pm_classical(qrm::QState(0.5 * qrm::identity(2)), comp, tol)
          .value;
  check("pguess classical (I/2, computational)", std::abs(pc - 1.0) <= 1e-7);

  // Elegant joint measurement basis is orthonormal across theta.
  bool orth = true;
  for (int k = 0; k <= 4; ++k) {
    std::vector<qrm::CVector> basis = qrm::ejm_basis(k * (M_PI / 2) / 4.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        orth = orth && std::abs(basis[i].dot(basis[j]) -
                                qrm::Complex(i == j ? 1.0 : 0.0)) <= 1e-12;
  }
  check("ejm basis orthonormal", orth);

  // Perfect quantum construction reaches value 1 on the theta = 0 marginal.
  qrm::PerfectConstruction pcon =
      qrm::perfect_quantum_construction(qrm::ejm_basis(0.0));
  const double pq =
      qrm::eval_quantum_strategy(pcon.strategy, pcon.rho, pcon.povm, 1e-9)
          .value;
  check("perfect construction value 1", std::abs(pq - 1.0) <= 1e-9);

  // The theta = 0 marginal has tetrahedral axes with Bloch length
  // sqrt(3)/2, so its visibility threshold is 2 sqrt(2) / 3.
  const double t = qrm::pm_visibility(qrm::ejm_povm(0.0), tol).t_star;
  check("marginal visibility 2 sqrt(2) / 3",
        std::abs(t - 2.0 * std::sqrt(2.0) / 3.0) <= 1e-4);

  // QRNG model endpoints.
  qrm::RVector b0 = qrm::born(qrm::qrng_model(0.0).state,
                              qrm::qrng_model(0.0).povm);
  qrm::RVector b1 = qrm::born(qrm::qrng_model(1.0).state,
                              qrm::qrng_model(1.0).povm);
  check("qrng born endpoints",
        std::abs(b0(0) - 1.0) <= 1e-12 && std::abs(b1(1) - 0.5) <= 1e-12 &&
            std::abs(b1(2) - 0.5) <= 1e-12);

  std::cout << (failures == 0 ? "selftest OK" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"adversarial guessing probabilities for noisy measurements"};
  app.require_subcommand(1);

  double theta = 0.0;
  std::string mu_grid, in_path, out_path, format;
  double tol = qrm::default_solver_tol();

  CLI::App *ejm = app.add_subcommand("ejm", "emit basis and marginal POVM");
  ejm->add_option("--theta", theta, "angle in [0, pi/2]")->required();
  ejm->add_option("--out", out_path, "output file (default stdout)");

  CLI::App *pmsim =
      app.add_subcommand("pmsim", "projective simulability visibility");
  pmsim->add_option("--in", in_path, "POVM JSON file")->required();
  pmsim->add_option("--tol", tol, "solver tolerance");
  pmsim->add_option("--out", out_path, "output file (default stdout)");

  CLI::App *pguess =
      app.add_subcommand("pguess", "adversary guessing probability");
  pguess->add_option("--in", in_path, "problem JSON file")->required();
  pguess->add_option("--tol", tol, "solver tolerance");
  pguess->add_option("--out", out_path, "output file (default stdout)");

  CLI::App *curve =
      app.add_subcommand("qrng-curve", "detector-noise guessing curve");
  curve->add_option("--mu-grid", mu_grid, "grid a:b:step (default 0:1:0.05)");
  curve->add_option("--tol", tol, "solver tolerance");
  curve->add_option("--format", format, "json or csv (default csv)")
      ->default_val("csv");
  curve->add_option("--out", out_path, "output file (default stdout)");

  CLI::App *certify = app.add_subcommand(
      "certify-theorem4", "four-outcome qubit separation pipeline");
  certify->add_option("--tol", tol, "solver tolerance");
  certify->add_option("--out", out_path, "output file (default stdout)");

  CLI::App *selftest =
      app.add_subcommand("selftest", "run fast built-in oracle checks");
  selftest->add_option("--tol", tol, "solver tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ejm->parsed()) return run_ejm(theta, out_path);
    if (pmsim->parsed()) return run_pmsim(in_path, tol, out_path);
    if (pguess->parsed()) return run_pguess(in_path, tol, out_path);
    if (curve->parsed()) return run_qrng_curve(mu_grid, tol, format, out_path);
    if (certify->parsed()) return run_certify(tol, out_path);
    if (selftest->parsed()) return run_selftest(tol);
  } catch (const std::invalid_argument &e) {
    std::cerr << Json{{"error", {{"type", "validation"},
                                 {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << Json{{"error", {{"type", "solver"},
                                 {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }
  return 1;
}
