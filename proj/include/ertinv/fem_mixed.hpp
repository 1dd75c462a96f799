#pragma once

#include <cstddef>
#include <limits>

#include "ertinv/mesh.hpp"
#include "ertinv/sparse.hpp"

namespace ertinv {

/// Boundary portion carrying the essential zero-normal-trace condition of the
/// regularization operator. The 2D experiments use kNone (Gamma_D is the whole
/// boundary).
enum class RegularizationNeumann { kNone, kSurface, kFar };

/// Lowest-order Raviart-Thomas x piecewise-constant pair on a triangulation.
/// Flux dofs are normalized to unit normal flux across their edge with the
/// global low-to-high orientation; edges on Gamma_N are constrained out.
struct MixedSpaces {
  static constexpr std::size_t kConstrained = std::numeric_limits<std::size_t>::max();

  const Mesh* mesh = nullptr;
  std::size_t n_flux_dofs = 0;  // K
  std::size_t n_cell_dofs = 0;  // N
  std::vector<std::size_t> edge_dof_map;  // edge index -> dof index or kConstrained
};

MixedSpaces make_mixed_spaces(const Mesh& mesh,
                              RegularizationNeumann gamma_n = RegularizationNeumann::kNone);

/// RT0 mass matrix (K x K), exact quadrature.
SparseMatrix assemble_Q(const MixedSpaces& spaces);

/// Divergence pairing (N x K); entries are +-1 by the flux normalization.
SparseMatrix assemble_D(const MixedSpaces& spaces);

/// D diag(Q)^-1 D^T, the diagonally lumped Schur complement fed to AMG.
SparseMatrix assemble_lumped_schur(const SparseMatrix& Q, const SparseMatrix& D);

/// Sparse saddle matrix [[Q, D^T], [D, 0]] of size (K+N) x (K+N).
SparseMatrix make_saddle_matrix(const SparseMatrix& Q, const SparseMatrix& D);

}  // namespace ertinv
