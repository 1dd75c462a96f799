#include "ertinv/fem_mixed.hpp"

#include <cmath>
#include <stdexcept>

namespace ertinv {

MixedSpaces make_mixed_spaces(const Mesh& mesh, RegularizationNeumann gamma_n) {
  MixedSpaces spaces;
  spaces.mesh = &mesh;
  spaces.n_cell_dofs = mesh.n_cells();
  spaces.edge_dof_map.assign(mesh.n_edges(), 0);

  std::vector<bool> constrained(mesh.n_edges(), false);
  if (gamma_n != RegularizationNeumann::kNone) {
    const BoundaryTag tag = gamma_n == RegularizationNeumann::kSurface ? BoundaryTag::kSurface
                                                                       : BoundaryTag::kFar;
    for (const auto& be : mesh.boundary_edges)
      if (be.tag == tag) constrained[be.edge] = true;
  }

  std::size_t next = 0;
  for (std::size_t e = 0; e < mesh.n_edges(); ++e)
    spaces.edge_dof_map[e] = constrained[e] ? MixedSpaces::kConstrained : next++;
  spaces.n_flux_dofs = next;
  return spaces;
}

SparseMatrix assemble_Q(const MixedSpaces& spaces) {
  const Mesh& mesh = *spaces.mesh;
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.n_cells());

  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const double area = mesh.cell_area(c);
    const std::array<double, 2> pts[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]],
                                          mesh.vertices[t[2]]};
    // Local edge loc has endpoints (t[loc], t[loc+1]) and opposite vertex
    // t[loc+2]; the RT0 shape is sign * (x - opposite) / (2 area).
    const std::array<double, 2> mids[3] = {
        {0.5 * (pts[0][0] + pts[1][0]), 0.5 * (pts[0][1] + pts[1][1])},
        {0.5 * (pts[1][0] + pts[2][0]), 0.5 * (pts[1][1] + pts[2][1])},
        {0.5 * (pts[2][0] + pts[0][0]), 0.5 * (pts[2][1] + pts[0][1])}};

    for (int li = 0; li < 3; ++li) {
      const std::size_t dof_i = spaces.edge_dof_map[mesh.cell_edges[c][static_cast<std::size_t>(li)]];
      if (dof_i == MixedSpaces::kConstrained) continue;
      const auto& opp_i = pts[(li + 2) % 3];
      const double si = mesh.cell_edge_signs[c][static_cast<std::size_t>(li)];
      for (int lj = 0; lj < 3; ++lj) {
        const std::size_t dof_j =
            spaces.edge_dof_map[mesh.cell_edges[c][static_cast<std::size_t>(lj)]];
        if (dof_j == MixedSpaces::kConstrained) continue;
        const auto& opp_j = pts[(lj + 2) % 3];
        const double sj = mesh.cell_edge_signs[c][static_cast<std::size_t>(lj)];
        // Edge-midpoint rule, exact for the quadratic integrand.
        double integral = 0.0;
        for (const auto& q : mids)
          integral += (q[0] - opp_i[0]) * (q[0] - opp_j[0]) +
                      (q[1] - opp_i[1]) * (q[1] - opp_j[1]);
        integral *= area / 3.0;
        trip.push_back({dof_i, dof_j, si * sj * integral / (4.0 * area * area)});
      }
    }
  }
  return from_triplets(spaces.n_flux_dofs, spaces.n_flux_dofs, std::move(trip));
}

SparseMatrix assemble_D(const MixedSpaces& spaces) {
  const Mesh& mesh = *spaces.mesh;
  std::vector<Triplet> trip;
  trip.reserve(3 * mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (std::size_t loc = 0; loc < 3; ++loc) {
      const std::size_t dof = spaces.edge_dof_map[mesh.cell_edges[c][loc]];
      if (dof == MixedSpaces::kConstrained) continue;
      trip.push_back({c, dof, static_cast<double>(mesh.cell_edge_signs[c][loc])});
    }
  }
  return from_triplets(spaces.n_cell_dofs, spaces.n_flux_dofs, std::move(trip));
}

SparseMatrix assemble_lumped_schur(const SparseMatrix& Q, const SparseMatrix& D) {
  if (Q.n_rows != Q.n_cols || D.n_cols != Q.n_rows)
    throw std::invalid_argument("assemble_lumped_schur: shape mismatch");
  Vector inv_diag = diagonal(Q);
  for (double& v : inv_diag) {
    if (!(v > 0.0))
      throw std::runtime_error("assemble_lumped_schur: zero diagonal in Q (degenerate cell)");
    v = 1.0 / v;
  }
  return sparse_matmul(D, scale_rows(transpose(D), inv_diag));
}

SparseMatrix make_saddle_matrix(const SparseMatrix& Q, const SparseMatrix& D) {
  const std::size_t K = Q.n_rows;
  const std::size_t N = D.n_rows;
  std::vector<Triplet> trip;
  trip.reserve(Q.nnz() + 2 * D.nnz());
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t k = Q.row_offsets[i]; k < Q.row_offsets[i + 1]; ++k)
      trip.push_back({i, Q.column_indices[k], Q.values[k]});
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = D.row_offsets[i]; k < D.row_offsets[i + 1]; ++k) {
      trip.push_back({K + i, D.column_indices[k], D.values[k]});
      trip.push_back({D.column_indices[k], K + i, D.values[k]});
    }
  }
  return from_triplets(K + N, K + N, std::move(trip));
}

}  // namespace ertinv
