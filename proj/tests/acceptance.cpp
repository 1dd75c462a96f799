// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ertinv/inversion.hpp"
#include "ertinv/minres.hpp"
#include "ertinv/spectral.hpp"
#include "inversion_fixtures.hpp"
#include "test_helpers.hpp"

using namespace ertinv;
using test_helpers::dense_lu_solve;
using test_helpers::make_unit_square_mesh;
using test_helpers::random_vector;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d. %s (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void run(int index, const std::string& name,
         const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    report(index, name, pass, detail);
  } catch (const std::exception& e) {
    report(index, name, false, std::string("exception: ") + e.what());
  }
}

struct GnOutcome {
  ModelVector model;
  GnReport report;
};

GnOutcome invert_case(const fixtures::CheckerboardCase& cs, double beta, GnAlgorithm algo,
                      std::size_t steps, double tol) {
  GnProblem problem;
  problem.mesh = &cs.mesh;
  problem.survey = &cs.survey;
  problem.g_obs = cs.g_obs;
  problem.m_ref = cs.m_ref;
  problem.m0 = cs.m_ref;
  GnConfig config;
  config.beta = beta;
  config.max_outer_steps = steps;
  config.minres_tol = tol;
  config.algorithm = algo;
  auto [m, rep] = gauss_newton(problem, config);
  return {std::move(m), std::move(rep)};
}

std::pair<bool, std::string> criterion_survey_combinatorics() {
  const std::size_t neles[] = {17, 33, 65, 129};
  const std::size_t expected[] = {46, 142, 334, 718};
  for (int i = 0; i < 4; ++i) {
    const Survey s = pole_dipole_survey(neles[i], {-50.0, 50.0});
    if (s.n_measurements() != expected[i])
      return {false, "nele " + std::to_string(neles[i]) + " gave M = " +
                         std::to_string(s.n_measurements())};
  }
  return {true, "M = {46, 142, 334, 718} exact"};
}

std::pair<bool, std::string> criterion_woodbury_identity() {
  const Mesh mesh = make_unit_square_mesh(5);
  const MixedSpaces spaces = make_mixed_spaces(mesh);
  const SparseMatrix Q = assemble_Q(spaces);
  const SparseMatrix D = assemble_D(spaces);
  const std::size_t K = spaces.n_flux_dofs, N = spaces.n_cell_dofs, M = 7;
  if (K + N > 400) return {false, "instance too large"};

  std::mt19937 rng(13);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix J(M, N);
  for (double& v : J.values) v = normal(rng);
  const ModelVector m = random_vector(N, rng), m_ref = random_vector(N, rng);
  const Vector g = random_vector(M, rng), g_obs = random_vector(M, rng);
  const double beta = 0.25;

  const Factorization F = sparse_factorize(make_saddle_matrix(Q, D));
  const ModelVector delta = direct_step(F, J, m, m_ref, g, g_obs, beta);

  DenseMatrix A = to_dense(make_saddle_matrix(Q, D));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < M; ++r) s += J(r, i) * J(r, j);
      A(K + i, K + j) -= s / beta;
    }
  Vector rhs(K + N, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t c = 0; c < N; ++c) s -= D.coeff(c, k) * (m[c] - m_ref[c]);
    rhs[k] = s;
  }
  for (std::size_t c = 0; c < N; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < M; ++r) s += J(r, c) * (g[r] - g_obs[r]);
    rhs[K + c] = s / beta;
  }
  const Vector sol = dense_lu_solve(A, rhs);
  Vector ref(N);
  for (std::size_t c = 0; c < N; ++c) ref[c] = sol[K + c];

  const double err = test_helpers::rel_diff(delta, ref);
  char buf[64];
  std::snprintf(buf, sizeof buf, "relative error %.3g <= 1e-8", err);
  return {err <= 1e-8, buf};
}

std::pair<bool, std::string> criterion_murphy_golub_wathen() {
  const Mesh mesh = make_unit_square_mesh(7);  // 259 dofs
  const MixedSpaces spaces = make_mixed_spaces(mesh);
  const SparseMatrix Q = assemble_Q(spaces);
  const SparseMatrix D = assemble_D(spaces);
  const SparseMatrix A = make_saddle_matrix(Q, D);
  if (A.n_rows > 500) return {false, "mesh too large"};

  const DenseMatrix J_empty(0, spaces.n_cell_dofs);
  const DenseMatrix P = dense_ideal_preconditioner(Q, D, J_empty, 1.0);
  const DenseMatrix L = dense_cholesky(P);

  std::mt19937 rng(17);
  const Vector b = random_vector(A.n_rows, rng);
  const Vector x0(A.n_rows, 0.0);
  auto [x, rep] = minres([&A](std::span<const double> v) { return spmv(A, v); },
                         [&L](std::span<const double> v) { return cholesky_solve(L, v); }, b,
                         x0, 1e-10, 10);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu iterations to %.2g", rep.iterations,
                rep.true_relative_residual);
  return {rep.converged && rep.iterations <= 3, buf};
}

std::pair<bool, std::string> criterion_pearson_inclusion() {
  const Mesh mesh = make_unit_square_mesh(5);
  const MixedSpaces spaces = make_mixed_spaces(mesh);
  const SparseMatrix Q = assemble_Q(spaces);
  const SparseMatrix D = assemble_D(spaces);
  if (spaces.n_flux_dofs + spaces.n_cell_dofs > 400) return {false, "instance too large"};

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::mt19937 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  int combos = 0;
  double worst = 0.0;
  for (const double beta : {1e-2, 1.0, 1e2}) {
    for (const std::size_t M : {std::size_t{1}, std::size_t{5}, std::size_t{20}}) {
      DenseMatrix J(M, spaces.n_cell_dofs);
      for (double& v : J.values) v = normal(rng);
      const DenseMatrix A = dense_saddle_matrix(Q, D, J, beta);
      const DenseMatrix P = dense_ideal_preconditioner(Q, D, J, beta);
      for (double ev : preconditioned_eigenvalues(A, P)) {
        const double viol =
            std::min(std::max({-1.0 - ev, ev + 1.0 / phi, 0.0}),
                     std::max({1.0 - ev, ev - phi, 0.0}));
        worst = std::max(worst, viol);
      }
      ++combos;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d (beta, M) combinations, worst violation %.3g", combos,
                worst);
  return {combos == 9 && worst <= 1e-8, buf};
}

std::pair<bool, std::string> criterion_jacobian() {
  const Mesh mesh = build_half_disk_mesh(80.0, 17, {-50.0, 50.0});
  Survey survey = pole_dipole_survey(17, {-50.0, 50.0});
  attach_electrode_positions(survey, mesh);
  const ModelVector m = fixtures::checkerboard_model(mesh, 1.0 / 3500.0, 1.0 / 7000.0);
  const ResponseJacobian rj = evaluate_response_and_jacobian(mesh, m, survey);

  // row-sum identity
  const Vector j1 = matvec(rj.J, Vector(mesh.n_cells(), 1.0));
  double rowsum_err = 0.0;
  for (std::size_t i = 0; i < rj.g.size(); ++i)
    rowsum_err = std::max(rowsum_err, std::abs(j1[i] + rj.g[i]) / std::abs(rj.g[i]));

  // central finite differences on 5 cells
  std::mt19937 rng(23);
  std::uniform_int_distribution<std::size_t> pick(0, mesh.n_cells() - 1);
  const double step = 1e-5;
  double fd_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t c = pick(rng);
    ModelVector plus = m, minus = m;
    plus[c] += step;
    minus[c] -= step;
    const Vector gp = evaluate_response_and_jacobian(mesh, plus, survey).g;
    const Vector gm = evaluate_response_and_jacobian(mesh, minus, survey).g;
    for (std::size_t i = 0; i < rj.g.size(); ++i) {
      const double fd = (gp[i] - gm[i]) / (2.0 * step);
      const double scale = std::max(std::abs(rj.J(i, c)), 1e-3 * std::abs(rj.g[i]));
      if (scale > 0.0) fd_err = std::max(fd_err, std::abs(fd - rj.J(i, c)) / scale);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "fd error %.3g <= 1e-5, row-sum error %.3g <= 1e-10", fd_err,
                rowsum_err);
  return {fd_err <= 1e-5 && rowsum_err <= 1e-10, buf};
}

std::pair<bool, std::string> criterion_calibration() {
  const Mesh mesh = build_half_disk_mesh(80.0, 17, {-50.0, 50.0});
  Survey survey = pole_dipole_survey(17, {-50.0, 50.0});
  attach_electrode_positions(survey, mesh);
  const double sigma0 = 1.0 / 3500.0;
  const ResponseJacobian rj =
      evaluate_response_and_jacobian(mesh, ModelVector(mesh.n_cells(), std::log(sigma0)), survey);

  const double h = 100.0 / 16.0;
  const double lo = -50.0 + 5.0 * h, hi = 50.0 - 5.0 * h;
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < survey.n_measurements(); ++i) {
    const auto& c = survey.configs[i];
    bool interior = true;
    for (std::size_t e : {c.a, c.m, c.n}) {
      const double x = survey.electrode_positions[e];
      if (x < lo - 1e-9 || x > hi + 1e-9) interior = false;
    }
    if (!interior) continue;
    ++checked;
    worst = std::max(worst, std::abs(rj.g[i] * sigma0 - 1.0));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu interior configs, worst deviation %.1f%% <= 15%%", checked,
                100.0 * worst);
  return {checked >= 6 && worst <= 0.15, buf};
}

std::pair<bool, std::string> criterion_mixed_poisson() {
  const auto exact = [](double x, double z) { return std::sin(M_PI * x) * std::sin(M_PI * z); };
  const auto rhs_f = [&](double x, double z) { return 2.0 * M_PI * M_PI * exact(x, z); };

  std::vector<double> errors;
  for (std::size_t n : {8u, 16u, 32u}) {
    const Mesh mesh = make_unit_square_mesh(n);
    const MixedSpaces spaces = make_mixed_spaces(mesh);
    const SparseMatrix Q = assemble_Q(spaces);
    const SparseMatrix D = assemble_D(spaces);
    const std::size_t K = spaces.n_flux_dofs, N = spaces.n_cell_dofs;
    Vector rhs(K + N, 0.0);
    for (std::size_t c = 0; c < N; ++c) {
      const auto& t = mesh.cells[c];
      const double area = mesh.cell_area(c);
      double integral = 0.0;
      for (int loc = 0; loc < 3; ++loc) {
        const auto& a = mesh.vertices[t[static_cast<std::size_t>(loc)]];
        const auto& b = mesh.vertices[t[static_cast<std::size_t>((loc + 1) % 3)]];
        integral += rhs_f(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
      }
      rhs[K + c] = -integral * area / 3.0;
    }
    const Vector sol = sparse_factorize(make_saddle_matrix(Q, D)).solve(rhs);
    double err_sq = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      const auto& t = mesh.cells[c];
      const double area = mesh.cell_area(c);
      for (int loc = 0; loc < 3; ++loc) {
        const auto& a = mesh.vertices[t[static_cast<std::size_t>(loc)]];
        const auto& b = mesh.vertices[t[static_cast<std::size_t>((loc + 1) % 3)]];
        const double d = sol[K + c] - exact(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
        err_sq += d * d * area / 3.0;
      }
    }
    errors.push_back(std::sqrt(err_sq));
  }
  const double rate1 = std::log2(errors[0] / errors[1]);
  const double rate2 = std::log2(errors[1] / errors[2]);
  char buf[96];
  std::snprintf(buf, sizeof buf, "L2 rates %.2f, %.2f >= 0.9", rate1, rate2);
  return {rate1 >= 0.9 && rate2 >= 0.9, buf};
}

std::pair<bool, std::string> criterion_preconditioner_trends() {
  const std::size_t neles[] = {17, 33, 65};
  std::vector<std::vector<std::size_t>> wb_iters, lp_iters;  // [config][step]
  for (std::size_t nele : neles) {
    const fixtures::CheckerboardCase cs = fixtures::make_checkerboard_case(nele);
    const GnOutcome wb = invert_case(cs, 0.1, GnAlgorithm::kWoodburyMinres, 2, 1e-7);
    const GnOutcome lp = invert_case(cs, 0.1, GnAlgorithm::kLaplaceMinres, 2, 1e-7);
    wb_iters.push_back({wb.report.steps[0].minres_iters, wb.report.steps[1].minres_iters});
    lp_iters.push_back({lp.report.steps[0].minres_iters, lp.report.steps[1].minres_iters});
  }

  bool ok = true;
  std::string detail;
  for (std::size_t cfg = 0; cfg < 3; ++cfg) {
    detail += "nele " + std::to_string(neles[cfg]) + ": wb {" +
              std::to_string(wb_iters[cfg][0]) + "," + std::to_string(wb_iters[cfg][1]) +
              "} lp {" + std::to_string(lp_iters[cfg][0]) + "," +
              std::to_string(lp_iters[cfg][1]) + "}; ";
    for (std::size_t s = 0; s < 2; ++s) {
      if (wb_iters[cfg][s] > 40) ok = false;                      // (a) bounded
      if (lp_iters[cfg][s] <= wb_iters[cfg][s]) ok = false;       // (b) ordering
    }
  }
  for (std::size_t s = 0; s < 2; ++s) {
    std::size_t wmin = wb_iters[0][s], wmax = wb_iters[0][s];
    for (std::size_t cfg = 1; cfg < 3; ++cfg) {
      wmin = std::min(wmin, wb_iters[cfg][s]);
      wmax = std::max(wmax, wb_iters[cfg][s]);
    }
    if (wmax > 2 * wmin) ok = false;  // (a) spread
    for (std::size_t cfg = 1; cfg < 3; ++cfg)
      if (lp_iters[cfg][s] <= lp_iters[cfg - 1][s]) ok = false;  // (b) strict growth
  }
  return {ok, detail};
}

std::pair<bool, std::string> criterion_beta_robustness() {
  const fixtures::CheckerboardCase cs = fixtures::make_checkerboard_case(33);
  const double betas[] = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<std::vector<std::size_t>> wb, lp;  // [beta][step]
  for (double beta : betas) {
    const GnOutcome w = invert_case(cs, beta, GnAlgorithm::kWoodburyMinres, 2, 1e-7);
    const GnOutcome l = invert_case(cs, beta, GnAlgorithm::kLaplaceMinres, 2, 1e-7);
    wb.push_back({w.report.steps[0].minres_iters, w.report.steps[1].minres_iters});
    lp.push_back({l.report.steps[0].minres_iters, l.report.steps[1].minres_iters});
  }

  bool ok = true;
  std::string detail;
  for (std::size_t s = 0; s < 2; ++s) {
    std::size_t wmin = wb[0][s], wmax = wb[0][s];
    for (std::size_t b = 0; b < 5; ++b) {
      wmin = std::min(wmin, wb[b][s]);
      wmax = std::max(wmax, wb[b][s]);
    }
    if (wmax > 2 * wmin) ok = false;
    detail += "step " + std::to_string(s + 1) + ": wb max/min " + std::to_string(wmax) + "/" +
              std::to_string(wmin) + ", lp {";
    for (std::size_t b = 0; b < 5; ++b) {
      detail += std::to_string(lp[b][s]) + (b + 1 < 5 ? "," : "}; ");
      if (b > 0 && lp[b][s] > lp[b - 1][s]) ok = false;  // nonincreasing in beta
    }
  }
  return {ok, detail};
}

std::pair<bool, std::string> criterion_end_to_end() {
  const fixtures::CheckerboardCase cs = fixtures::make_checkerboard_case(17);
  // The criterion pins no inner tolerance; 1e-11 resolves the update well past
  // the Euclidean data-block scale so the two routes are comparable.
  const GnOutcome wb = invert_case(cs, 0.1, GnAlgorithm::kWoodburyMinres, 2, 1e-11);
  const GnOutcome dr = invert_case(cs, 0.1, GnAlgorithm::kDirect, 2, 1e-11);

  const double m0 = wb.report.steps[0].misfit;
  const double m1 = wb.report.steps[1].misfit;
  const double m2 = wb.report.final_misfit;
  const double agree = test_helpers::rel_diff(wb.model, dr.model);

  char buf[128];
  std::snprintf(buf, sizeof buf, "misfit %.4g > %.4g > %.4g, direct/woodbury diff %.3g <= 1e-4",
                m0, m1, m2, agree);
  return {m1 < m0 && m2 < m1 && agree <= 1e-4, buf};
}

}  // namespace

int main() {
  run(1, "survey combinatorics M = 6 nele - 56", criterion_survey_combinatorics);
  run(2, "Woodbury identity against the dense block solve", criterion_woodbury_identity);
  run(3, "Murphy-Golub-Wathen: ideal preconditioner in <= 3 iterations",
      criterion_murphy_golub_wathen);
  run(4, "Pearson inclusion [-1,-1/phi] U [1,phi]", criterion_pearson_inclusion);
  run(5, "adjoint Jacobian vs finite differences and row-sum identity", criterion_jacobian);
  run(6, "apparent-resistivity calibration within 15%", criterion_calibration);
  run(7, "mixed-Poisson L2 convergence rate >= 0.9", criterion_mixed_poisson);
  run(8, "preconditioner robustness trends across survey sizes",
      criterion_preconditioner_trends);
  run(9, "beta robustness on the 33-electrode problem", criterion_beta_robustness);
  run(10, "end-to-end checkerboard inversion", criterion_end_to_end);

  if (failures > 0) {
    std::printf("%d of 10 acceptance criteria FAILED\n", failures);
    return 1;
  }
  std::printf("all 10 acceptance criteria passed\n");
  return 0;
}
