#include "ertinv/inversion.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ertinv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

DenseMatrix cholesky_with_retry(DenseMatrix C) {
  try {
    return dense_cholesky(C);
  } catch (const std::runtime_error&) {
    // One retry after symmetrization; a second failure signals inconsistent
    // inputs and is fatal.
    for (std::size_t i = 0; i < C.n_rows; ++i)
      for (std::size_t j = i + 1; j < C.n_cols; ++j) {
        const double v = 0.5 * (C(i, j) + C(j, i));
        C(i, j) = v;
        C(j, i) = v;
      }
    return dense_cholesky(C);
  }
}

/// C = I_M + (1/beta) J H with H of shape N x M.
DenseMatrix capacitance_matrix(const DenseMatrix& J, const DenseMatrix& H, double beta) {
  DenseMatrix C = matmul(J, H);
  for (double& v : C.values) v /= beta;
  for (std::size_t i = 0; i < C.n_rows; ++i) C(i, i) += 1.0;
  return C;
}

}  // namespace

Vector SaddleOperator::apply(std::span<const double> x) const {
  const std::size_t K = Q->n_rows;
  const std::size_t N = D->n_rows;
  if (x.size() != K + N) throw std::invalid_argument("SaddleOperator: dimension mismatch");
  const auto zeta = x.subspan(0, K);
  const auto dm = x.subspan(K, N);

  Vector out(K + N, 0.0);
  auto out1 = std::span(out).subspan(0, K);
  auto out2 = std::span(out).subspan(K, N);

  spmv_add(*Q, zeta, 1.0, out1);
  const Vector dt = spmv_transpose(*D, dm);  // D^T dm
  axpy(1.0, dt, out1);

  spmv_add(*D, zeta, 1.0, out2);
  if (J != nullptr && J->n_rows > 0) {
    const Vector jdm = matvec(*J, dm);
    const Vector jtjdm = matvec_transpose(*J, jdm);
    axpy(-1.0 / beta, jtjdm, out2);
  }
  return out;
}

Vector WoodburyPreconditioner::apply(std::span<const double> y) const {
  const std::size_t K = q_diag_inv->size();
  const std::size_t N = amg->size();
  if (y.size() != K + N) throw std::invalid_argument("WoodburyPreconditioner: dimension mismatch");

  Vector out(K + N, 0.0);
  for (std::size_t i = 0; i < K; ++i) out[i] = (*q_diag_inv)[i] * y[i];

  const auto y2 = y.subspan(K, N);
  Vector s = amg_apply(*amg, y2);
  if (J != nullptr && J->n_rows > 0) {
    Vector t = matvec_transpose(h_hat, y2);  // H^T y2, length M
    cholesky_solve_in_place(capacitance_chol, t);
    const Vector w = matvec(h_hat, t);
    axpy(-1.0 / beta, w, s);
  }
  std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(K));
  return out;
}

WoodburyPreconditioner build_woodbury_preconditioner(const Vector& q_diag_inv,
                                                     const AmgHierarchy& amg,
                                                     const DenseMatrix& J, double beta,
                                                     WoodburyBuildTimings* timings) {
  if (!(beta > 0.0)) throw std::invalid_argument("build_woodbury_preconditioner: beta <= 0");
  const std::size_t N = amg.size();
  const std::size_t M = J.n_rows;
  if (J.n_cols != N) throw std::invalid_argument("build_woodbury_preconditioner: J shape mismatch");

  WoodburyPreconditioner pc;
  pc.q_diag_inv = &q_diag_inv;
  pc.amg = &amg;
  pc.J = &J;
  pc.beta = beta;

  auto t0 = Clock::now();
  pc.h_hat = DenseMatrix(N, M);
  Vector col(N);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t c = 0; c < N; ++c) col[c] = J(i, c);
    const Vector h = amg_apply(amg, col);
    for (std::size_t c = 0; c < N; ++c) pc.h_hat(c, i) = h[c];
  }
  if (timings) timings->t_H = seconds_since(t0);

  t0 = Clock::now();
  DenseMatrix C = capacitance_matrix(J, pc.h_hat, beta);
  if (timings) timings->t_C = seconds_since(t0);

  t0 = Clock::now();
  pc.capacitance_chol = cholesky_with_retry(std::move(C));
  if (timings) timings->t_chol = seconds_since(t0);
  return pc;
}

Vector assemble_gn_rhs(const ModelVector& m, const ModelVector& m_ref, const Vector& g,
                       const Vector& g_obs, const DenseMatrix& J, const SparseMatrix& D,
                       double beta) {
  const std::size_t K = D.n_cols;
  const std::size_t N = D.n_rows;
  if (m.size() != N || m_ref.size() != N || J.n_cols != N || g.size() != J.n_rows ||
      g_obs.size() != J.n_rows)
    throw std::invalid_argument("assemble_gn_rhs: shape mismatch");

  Vector dm(N);
  for (std::size_t i = 0; i < N; ++i) dm[i] = m[i] - m_ref[i];
  Vector dg(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) dg[i] = g[i] - g_obs[i];

  Vector rhs(K + N, 0.0);
  const Vector dt = spmv_transpose(D, dm);
  for (std::size_t i = 0; i < K; ++i) rhs[i] = -dt[i];
  const Vector jt = matvec_transpose(J, dg);
  for (std::size_t i = 0; i < N; ++i) rhs[K + i] = jt[i] / beta;
  return rhs;
}

ModelVector direct_step(const Factorization& saddle_factor, const DenseMatrix& J,
                        const ModelVector& m, const ModelVector& m_ref, const Vector& g,
                        const Vector& g_obs, double beta, WoodburyBuildTimings* timings) {
  const std::size_t N = J.n_cols;
  const std::size_t M = J.n_rows;
  const std::size_t total = saddle_factor.size();
  if (total < N) throw std::invalid_argument("direct_step: factorization size mismatch");
  const std::size_t K = total - N;

  // H = S^-1 J^T = -P2 A^-1 [0; J^T], column by column.
  auto t0 = Clock::now();
  DenseMatrix H(N, M);
  Vector rhs(K + N, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t c = 0; c < N; ++c) rhs[K + c] = J(i, c);
    const Vector sol = saddle_factor.solve(rhs);
    for (std::size_t c = 0; c < N; ++c) H(c, i) = -sol[K + c];
  }
  if (timings) timings->t_H = seconds_since(t0);

  t0 = Clock::now();
  DenseMatrix C = capacitance_matrix(J, H, beta);
  if (timings) timings->t_C = seconds_since(t0);
  t0 = Clock::now();
  const DenseMatrix L = cholesky_with_retry(std::move(C));
  if (timings) timings->t_chol = seconds_since(t0);

  Vector dm(N);
  for (std::size_t i = 0; i < N; ++i) dm[i] = m[i] - m_ref[i];
  Vector y = matvec(J, dm);
  for (std::size_t i = 0; i < M; ++i) y[i] -= g[i] - g_obs[i];
  cholesky_solve_in_place(L, y);

  ModelVector delta(N);
  const Vector hy = matvec(H, y);
  for (std::size_t i = 0; i < N; ++i) delta[i] = -dm[i] + hy[i] / beta;
  return delta;
}

std::pair<ModelVector, GnReport> gauss_newton(const GnProblem& problem, const GnConfig& config) {
  if (!(config.beta > 0.0)) throw std::invalid_argument("gauss_newton: beta must be positive");
  if (problem.mesh == nullptr || problem.survey == nullptr)
    throw std::invalid_argument("gauss_newton: missing mesh or survey");
  const Mesh& mesh = *problem.mesh;
  const Survey& survey = *problem.survey;
  if (problem.g_obs.size() != survey.n_measurements())
    throw std::invalid_argument("gauss_newton: observation count mismatch");

  const MixedSpaces spaces = make_mixed_spaces(mesh);
  const SparseMatrix Q = assemble_Q(spaces);
  const SparseMatrix D = assemble_D(spaces);
  const std::size_t K = spaces.n_flux_dofs;
  const std::size_t N = spaces.n_cell_dofs;
  const std::size_t maxit = config.minres_maxit > 0 ? config.minres_maxit : 2 * (K + N);

  // Setup done once, prior to the nonlinear iteration.
  std::unique_ptr<Factorization> saddle_factor;
  Vector q_diag_inv;
  AmgHierarchy amg;
  if (config.algorithm == GnAlgorithm::kDirect) {
    saddle_factor = std::make_unique<Factorization>(make_saddle_matrix(Q, D));
  } else {
    q_diag_inv = diagonal(Q);
    for (double& v : q_diag_inv) v = 1.0 / v;
    amg = amg_setup(assemble_lumped_schur(Q, D));
  }

  GnReport report;
  report.n_flux_dofs = K;
  report.n_cell_dofs = N;
  report.n_measurements = survey.n_measurements();

  ModelVector m = problem.m0;
  if (m.size() != N) throw std::invalid_argument("gauss_newton: initial model size mismatch");

  for (std::size_t step = 0; step < config.max_outer_steps; ++step) {
    const ResponseJacobian rj = evaluate_response_and_jacobian(mesh, m, survey);
    GnStepReport sr;
    Vector dg(rj.g.size());
    for (std::size_t i = 0; i < dg.size(); ++i) dg[i] = rj.g[i] - problem.g_obs[i];
    sr.misfit = norm2(dg);

    ModelVector delta;
    if (config.algorithm == GnAlgorithm::kDirect) {
      const auto t0 = Clock::now();
      WoodburyBuildTimings timings;
      delta = direct_step(*saddle_factor, rj.J, m, problem.m_ref, rj.g, problem.g_obs,
                          config.beta, &timings);
      sr.t_H = timings.t_H;
      sr.t_C = timings.t_C;
      sr.t_chol = timings.t_chol;
      sr.t_norm = seconds_since(t0);
    } else {
      const bool woodbury = config.algorithm == GnAlgorithm::kWoodburyMinres;
      const auto t0 = Clock::now();

      WoodburyPreconditioner pc;
      if (woodbury) {
        WoodburyBuildTimings timings;
        pc = build_woodbury_preconditioner(q_diag_inv, amg, rj.J, config.beta, &timings);
        sr.t_H = timings.t_H;
        sr.t_C = timings.t_C;
        sr.t_chol = timings.t_chol;
      } else {
        pc.q_diag_inv = &q_diag_inv;
        pc.amg = &amg;
        pc.J = nullptr;  // plain Laplace preconditioner
        pc.beta = config.beta;
      }

      SaddleOperator op{&Q, &D, &rj.J, config.beta};
      const Vector b =
          assemble_gn_rhs(m, problem.m_ref, rj.g, problem.g_obs, rj.J, D, config.beta);
      const Vector x0(K + N, 0.0);
      auto [x, minres_report] =
          minres([&op](std::span<const double> v) { return op.apply(v); },
                 [&pc](std::span<const double> v) { return pc.apply(v); }, b, x0,
                 config.minres_tol, maxit);
      sr.minres_iters = minres_report.iterations;
      sr.converged = minres_report.converged;
      sr.euclid_relative_residual = minres_report.true_relative_residual;
      sr.pnorm_relative_residual = minres_report.pnorm_relative_residuals.back();
      delta.assign(x.begin() + static_cast<std::ptrdiff_t>(K), x.end());
      sr.t_norm = seconds_since(t0);
    }

    for (double v : delta)
      if (!std::isfinite(v)) throw std::runtime_error("gauss_newton: non-finite model update");
    for (std::size_t i = 0; i < N; ++i) m[i] += delta[i];
    report.steps.push_back(sr);

    if (config.misfit_reduction_tol > 0.0 && step > 0) {
      const double prev = report.steps[report.steps.size() - 2].misfit;
      if (sr.misfit > (1.0 - config.misfit_reduction_tol) * prev) break;
    }
  }

  {
    const ResponseJacobian rj = evaluate_response_and_jacobian(mesh, m, survey);
    Vector dg(rj.g.size());
    for (std::size_t i = 0; i < dg.size(); ++i) dg[i] = rj.g[i] - problem.g_obs[i];
    report.final_misfit = norm2(dg);
  }
  return {std::move(m), std::move(report)};
}

void write_result_json(const ModelVector& m, const GnReport& report, const std::string& path) {
  nlohmann::json j;
  j["m"] = m;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : report.steps) {
    steps.push_back({{"misfit", s.misfit},
                     {"minres_iters", s.minres_iters},
                     {"converged", s.converged},
                     {"euclid_relative_residual", s.euclid_relative_residual},
                     {"pnorm_relative_residual", s.pnorm_relative_residual},
                     {"t_H", s.t_H},
                     {"t_C", s.t_C},
                     {"t_chol", s.t_chol},
                     {"t_norm", s.t_norm}});
  }
  j["report"] = {{"steps", steps},
                 {"final_misfit", report.final_misfit},
                 {"K", report.n_flux_dofs},
                 {"N", report.n_cell_dofs},
                 {"M", report.n_measurements}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_result_json: cannot open " + path);
  out << j.dump(1, '\t') << "\n";
}

}  // namespace ertinv
