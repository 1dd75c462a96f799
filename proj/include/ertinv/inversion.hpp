#pragma once

#include <string>

#include "ertinv/amg.hpp"
#include "ertinv/factorization.hpp"
#include "ertinv/fem_mixed.hpp"
#include "ertinv/forward.hpp"
#include "ertinv/linalg.hpp"
#include "ertinv/minres.hpp"
#include "ertinv/sparse.hpp"
#include "ertinv/survey.hpp"

namespace ertinv {

/// Matrix-free action of the perturbed saddle operator
/// [[Q, D^T], [D, -(1/beta) J^T J]] on [zeta; dm].
struct SaddleOperator {
  const SparseMatrix* Q = nullptr;
  const SparseMatrix* D = nullptr;
  const DenseMatrix* J = nullptr;  // M x N; nullptr disables the low-rank term
  double beta = 1.0;

  std::size_t size() const { return Q->n_rows + D->n_rows; }
  Vector apply(std::span<const double> x) const;
};

/// Block-diagonal preconditioner diag(diag(Q)^-1, S_hat_{beta,m}^-1) with the
/// Schur block expanded by the Woodbury formula around the AMG V-cycle.
struct WoodburyPreconditioner {
  const Vector* q_diag_inv = nullptr;
  const AmgHierarchy* amg = nullptr;
  DenseMatrix h_hat;             // N x M columns S_hat^-1 J^T
  DenseMatrix capacitance_chol;  // lower factor of I_M + (1/beta) J H_hat
  const DenseMatrix* J = nullptr;
  double beta = 1.0;

  Vector apply(std::span<const double> y) const;
};

struct WoodburyBuildTimings {
  double t_H = 0.0;
  double t_C = 0.0;
  double t_chol = 0.0;
};

WoodburyPreconditioner build_woodbury_preconditioner(const Vector& q_diag_inv,
                                                     const AmgHierarchy& amg,
                                                     const DenseMatrix& J, double beta,
                                                     WoodburyBuildTimings* timings = nullptr);

/// Right-hand side [-D^T(m - m_ref); (1/beta) J^T (g - g_obs)].
Vector assemble_gn_rhs(const ModelVector& m, const ModelVector& m_ref, const Vector& g,
                       const Vector& g_obs, const DenseMatrix& J, const SparseMatrix& D,
                       double beta);

/// Gauss-Newton update via the Woodbury formula and a reusable factorization
/// of the unperturbed saddle matrix [[Q, D^T], [D, 0]].
ModelVector direct_step(const Factorization& saddle_factor, const DenseMatrix& J,
                        const ModelVector& m, const ModelVector& m_ref, const Vector& g,
                        const Vector& g_obs, double beta,
                        WoodburyBuildTimings* timings = nullptr);

enum class GnAlgorithm { kDirect, kWoodburyMinres, kLaplaceMinres };

struct GnConfig {
  double beta = 0.1;
  std::size_t max_outer_steps = 2;
  double minres_tol = 1e-7;
  std::size_t minres_maxit = 0;  // 0 -> 2 (K + N)
  GnAlgorithm algorithm = GnAlgorithm::kWoodburyMinres;
  /// Optional early exit: stop when the relative misfit reduction of a step
  /// falls below this value (0 disables).
  double misfit_reduction_tol = 0.0;
};

struct GnStepReport {
  double misfit = 0.0;  // ||g_m - g_obs||_2 entering the step
  std::size_t minres_iters = 0;
  bool converged = true;
  double euclid_relative_residual = 0.0;
  double pnorm_relative_residual = 0.0;
  double t_H = 0.0;     // seconds building H (columnwise solves / V-cycles)
  double t_C = 0.0;     // capacitance assembly
  double t_chol = 0.0;  // capacitance Cholesky
  double t_norm = 0.0;  // whole linear solve for the update
};

struct GnReport {
  std::vector<GnStepReport> steps;
  double final_misfit = 0.0;
  std::size_t n_flux_dofs = 0;
  std::size_t n_cell_dofs = 0;
  std::size_t n_measurements = 0;
};

struct GnProblem {
  const Mesh* mesh = nullptr;
  const Survey* survey = nullptr;
  Vector g_obs;
  ModelVector m_ref;
  ModelVector m0;
};

std::pair<ModelVector, GnReport> gauss_newton(const GnProblem& problem, const GnConfig& config);

void write_result_json(const ModelVector& m, const GnReport& report, const std::string& path);

}  // namespace ertinv
