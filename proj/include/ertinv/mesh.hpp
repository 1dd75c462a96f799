#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace ertinv {

enum class BoundaryTag { kSurface, kFar };

struct BoundaryEdge {
  std::size_t edge;
  BoundaryTag tag;
};

/// Conforming triangulation of the half-disk cross section. Coordinates are
/// (x, z) with z >= 0 the depth below the surface line {z = 0}. Immutable
/// after construction.
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<std::size_t, 3>> cells;  // counterclockwise
  std::vector<std::array<std::size_t, 2>> edges;  // low vertex index -> high
  std::vector<std::array<std::size_t, 3>> cell_edges;
  // +1 where the global edge normal (rotate low->high tangent by -90 deg)
  // points out of the cell, -1 otherwise.
  std::vector<std::array<int, 3>> cell_edge_signs;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::size_t> electrode_nodes;

  std::size_t n_vertices() const { return vertices.size(); }
  std::size_t n_cells() const { return cells.size(); }
  std::size_t n_edges() const { return edges.size(); }

  double cell_area(std::size_t c) const;
  std::array<double, 2> cell_centroid(std::size_t c) const;
};

struct GradingParams {
  /// Surface nodes inserted per electrode gap (>= 1; 1 = electrodes only).
  std::size_t surface_subdivision = 2;
  /// Geometric coarsening rate away from the surface layer (> 1).
  double growth = 1.4;
  /// Cap on the target edge length in the far field.
  double max_cell_size = 8.0;
};

/// Builds connectivity (edges, cell-edge incidence with orientation signs,
/// boundary tags) from raw vertices/cells. Cells with negative signed area
/// are flipped; degenerate cells are rejected. Boundary edges with both
/// endpoints on {z = 0} (within 1e-9 of the coordinate scale) are tagged
/// SURFACE, all others FAR.
Mesh finalize_mesh(std::vector<std::array<double, 2>> vertices,
                   std::vector<std::array<std::size_t, 3>> cells,
                   std::vector<std::size_t> electrode_nodes);

/// Graded mesh of the half-disk {z > 0, sqrt(x^2+z^2) < radius} with vertices
/// at the n_electrodes equidistant positions spanning `extent` on {z = 0}.
/// A uniform surface band of thickness ~ the electrode spacing is followed by
/// geometrically coarsening layers toward the polygonally approximated arc,
/// so the cell count scales linearly with the electrode count.
Mesh build_half_disk_mesh(double radius, std::size_t n_electrodes,
                          std::array<double, 2> extent,
                          const GradingParams& grading = {});

/// Red refinement: every triangle split into 4 congruent children. Electrode
/// nodes and boundary tags carry over.
Mesh refine_uniform(const Mesh& mesh);

void write_mesh_json(const Mesh& mesh, const std::string& path);
Mesh read_mesh_json(const std::string& path);

}  // namespace ertinv
