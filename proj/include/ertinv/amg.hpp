#pragma once

#include <optional>

#include "ertinv/factorization.hpp"
#include "ertinv/linalg.hpp"
#include "ertinv/sparse.hpp"

namespace ertinv {

struct AmgOptions {
  std::size_t coarse_threshold = 64;
  double strength = 0.08;
  double jacobi_damping = 2.0 / 3.0;
  double prolongation_damping = 2.0 / 3.0;
  /// Aggregates keep the root plus at most this many strong neighbors; small
  /// aggregates trade more levels for a stronger cycle under the single
  /// pre/post sweep.
  std::size_t max_aggregate_size = 3;
  std::size_t max_levels = 25;
  /// Swaps the V-cycle for an exact sparse solve; oracle mode for tests.
  bool exact_solve = false;
};

struct AmgLevel {
  SparseMatrix matrix;
  SparseMatrix prolongation;  // empty on the coarsest level
  Vector inv_diag;
};

/// Smoothed-aggregation hierarchy for an SPD matrix. One symmetric V-cycle
/// (damped Jacobi pre/post sweep, Galerkin coarse operators, dense coarsest
/// solve) per application, so the induced operator is a fixed SPD matrix.
struct AmgHierarchy {
  std::vector<AmgLevel> levels;
  DenseMatrix coarse_cholesky;
  AmgOptions options;
  std::optional<Factorization> exact;

  std::size_t n_levels() const { return levels.size(); }
  std::size_t size() const { return levels.empty() ? 0 : levels.front().matrix.n_rows; }
};

AmgHierarchy amg_setup(const SparseMatrix& s_hat, const AmgOptions& options = {});

/// z ~= S_hat^-1 r via one V-cycle (or the exact solve in oracle mode).
Vector amg_apply(const AmgHierarchy& hierarchy, std::span<const double> r);

}  // namespace ertinv
