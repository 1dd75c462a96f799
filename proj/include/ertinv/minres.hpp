#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ertinv/linalg.hpp"

namespace ertinv {

using LinearOperator = std::function<Vector(std::span<const double>)>;

struct MinresReport {
  std::size_t iterations = 0;
  /// Euclidean ||r_k||_2 / ||b||_2, entry 0 is the initial residual.
  std::vector<double> relative_residuals;
  /// Recurred ||r_k||_{P^-1} / ||r_0||_{P^-1}; non-increasing by construction.
  std::vector<double> pnorm_relative_residuals;
  bool converged = false;
  /// ||b - A x||_2 / ||b||_2 recomputed from the returned iterate.
  double true_relative_residual = 0.0;
};

/// Preconditioned MINRES for a symmetric operator A and an SPD preconditioner
/// P^-1. The Krylov recurrence minimizes the P^-1-norm of the residual; the
/// stopping test uses the Euclidean norm of the recurred residual, verified
/// against the true residual at declared convergence (continues if the true
/// relative residual exceeds 10*tol).
std::pair<Vector, MinresReport> minres(const LinearOperator& apply_A,
                                       const LinearOperator& apply_Pinv,
                                       std::span<const double> b,
                                       std::span<const double> x0, double tol,
                                       std::size_t maxit);

/// Unpreconditioned convenience overload.
std::pair<Vector, MinresReport> minres(const LinearOperator& apply_A,
                                       std::span<const double> b,
                                       std::span<const double> x0, double tol,
                                       std::size_t maxit);

}  // namespace ertinv
