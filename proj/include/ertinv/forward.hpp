#pragma once

#include <memory>
#include <string>

#include "ertinv/factorization.hpp"
#include "ertinv/linalg.hpp"
#include "ertinv/mesh.hpp"
#include "ertinv/survey.hpp"

namespace ertinv {

/// Cellwise log-conductivity, one entry per mesh cell.
using ModelVector = Vector;

/// P1 forward operator for -div(exp(m) grad u) = f with the far boundary
/// grounded (u = 0 on FAR) and the surface natural (zero normal current).
/// The factorization is built once and reused across all pole solves.
struct ForwardSystem {
  std::vector<std::ptrdiff_t> node_to_free;  // -1 on grounded nodes
  std::vector<std::size_t> free_to_node;
  SparseMatrix stiffness;  // reduced to free nodes, SPD
  std::unique_ptr<Factorization> factor;
};

ForwardSystem assemble_forward(const Mesh& mesh, const ModelVector& m);

/// Potential of a unit point source at the given mesh node (full-length nodal
/// vector, zeros on the grounded boundary). The return electrode sits at
/// infinity: the current exits through the grounded far boundary.
Vector solve_unit_pole(const ForwardSystem& system, std::size_t node);

struct ResponseJacobian {
  Vector g;        // apparent resistivities, length M
  DenseMatrix J;   // M x N sensitivity <J^i(m), phi_j>
};

/// One pole solve per unique electrode, then per configuration the energy
/// product of transmitter and receiver potentials, cell by cell. The rows of
/// J are the per-cell terms of -g, so J 1 = -g holds exactly.
ResponseJacobian evaluate_response_and_jacobian(const Mesh& mesh, const ModelVector& m,
                                                const Survey& survey);

void write_model_json(const ModelVector& m, const std::string& path);
ModelVector read_model_json(const std::string& path);

void write_observations_csv(const Vector& g_obs, const std::string& path);
Vector read_observations_csv(const std::string& path);

}  // namespace ertinv
