#include "ertinv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace ertinv {

namespace {

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

/// Geometric gap sequence from `first_gap` growing by `growth` (capped at
/// `max_gap`), rescaled so the gaps sum exactly to `span`.
std::vector<double> graded_gaps(double span, double first_gap, double growth, double max_gap) {
  std::vector<double> gaps;
  double g = std::min(first_gap, max_gap);
  double total = 0.0;
  while (total < span) {
    gaps.push_back(g);
    total += g;
    g = std::min(g * growth, max_gap);
  }
  const double scale = span / total;
  for (double& v : gaps) v *= scale;
  return gaps;
}

/// Node x-positions for one row of the layered mesh: uniform `spacing` on the
/// clamped core [core_lo, core_hi], geometric tails out to +-width capped at
/// `tail_cap` (keeps cells near-isotropic against the local layer height).
std::vector<double> row_positions(double width, double core_lo, double core_hi, double spacing,
                                  double growth, double tail_cap) {
  std::vector<double> xs;
  core_lo = std::max(core_lo, -0.9 * width);
  core_hi = std::min(core_hi, 0.9 * width);
  if (core_hi - core_lo < 2.0 * spacing || width < 3.0 * spacing) {
    const std::size_t n =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(2.0 * width / spacing)));
    for (std::size_t k = 0; k <= n; ++k)
      xs.push_back(-width + 2.0 * width * static_cast<double>(k) / static_cast<double>(n));
    return xs;
  }
  const auto left = graded_gaps(core_lo + width, spacing * growth, growth, tail_cap);
  double x = -width;
  xs.push_back(x);
  for (std::size_t k = left.size(); k-- > 1;) {  // coarse near the rim, fine near the core
    x += left[k];
    xs.push_back(x);
  }
  const std::size_t n_core = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround((core_hi - core_lo) / spacing)));
  for (std::size_t k = 0; k <= n_core; ++k)
    xs.push_back(core_lo + (core_hi - core_lo) * static_cast<double>(k) / static_cast<double>(n_core));
  const auto right = graded_gaps(width - core_hi, spacing * growth, growth, tail_cap);
  x = core_hi;
  for (std::size_t k = 0; k + 1 < right.size(); ++k) {
    x += right[k];
    xs.push_back(x);
  }
  xs.push_back(width);
  return xs;
}

}  // namespace

double Mesh::cell_area(std::size_t c) const {
  const auto& t = cells[c];
  return signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

std::array<double, 2> Mesh::cell_centroid(std::size_t c) const {
  const auto& t = cells[c];
  return {(vertices[t[0]][0] + vertices[t[1]][0] + vertices[t[2]][0]) / 3.0,
          (vertices[t[0]][1] + vertices[t[1]][1] + vertices[t[2]][1]) / 3.0};
}

Mesh finalize_mesh(std::vector<std::array<double, 2>> vertices,
                   std::vector<std::array<std::size_t, 3>> cells,
                   std::vector<std::size_t> electrode_nodes) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);
  mesh.electrode_nodes = std::move(electrode_nodes);

  double scale = 0.0;
  for (const auto& v : mesh.vertices)
    scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});

  for (auto& t : mesh.cells) {
    for (std::size_t v : t)
      if (v >= mesh.vertices.size()) throw std::invalid_argument("finalize_mesh: vertex index out of range");
    double area = signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (area < 0.0) {
      std::swap(t[1], t[2]);
      area = -area;
    }
    if (!(area > 0.0)) throw std::invalid_argument("finalize_mesh: degenerate cell");
  }
  for (std::size_t e : mesh.electrode_nodes)
    if (e >= mesh.vertices.size()) throw std::invalid_argument("finalize_mesh: electrode index out of range");

  std::map<std::array<std::size_t, 2>, std::size_t> edge_ids;
  mesh.cell_edges.resize(mesh.cells.size());
  mesh.cell_edge_signs.resize(mesh.cells.size());
  std::vector<int> incidence;  // per edge: number of incident cells
  std::vector<int> sign_sum;   // must vanish on interior edges

  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    for (int loc = 0; loc < 3; ++loc) {
      const std::size_t u = t[static_cast<std::size_t>(loc)];
      const std::size_t v = t[static_cast<std::size_t>((loc + 1) % 3)];
      const std::array<std::size_t, 2> key{std::min(u, v), std::max(u, v)};
      auto [it, inserted] = edge_ids.try_emplace(key, mesh.edges.size());
      if (inserted) {
        mesh.edges.push_back(key);
        incidence.push_back(0);
        sign_sum.push_back(0);
      }
      const std::size_t e = it->second;
      // CCW traversal u->v has the outward normal equal to the global edge
      // normal exactly when (u, v) is already in low->high order.
      const int sign = (u < v) ? +1 : -1;
      mesh.cell_edges[c][static_cast<std::size_t>(loc)] = e;
      mesh.cell_edge_signs[c][static_cast<std::size_t>(loc)] = sign;
      incidence[e] += 1;
      sign_sum[e] += sign;
    }
  }

  const double surface_tol = 1e-9 * (scale > 0.0 ? scale : 1.0);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (incidence[e] == 1) {
      const auto& ev = mesh.edges[e];
      const bool on_surface = std::abs(mesh.vertices[ev[0]][1]) <= surface_tol &&
                              std::abs(mesh.vertices[ev[1]][1]) <= surface_tol;
      mesh.boundary_edges.push_back({e, on_surface ? BoundaryTag::kSurface : BoundaryTag::kFar});
    } else if (incidence[e] == 2) {
      if (sign_sum[e] != 0)
        throw std::invalid_argument("finalize_mesh: interior edge with non-opposing orientations");
    } else {
      throw std::invalid_argument("finalize_mesh: edge shared by more than two cells");
    }
  }
  return mesh;
}

Mesh build_half_disk_mesh(double radius, std::size_t n_electrodes,
                          std::array<double, 2> extent, const GradingParams& grading) {
  if (n_electrodes < 2) throw std::invalid_argument("build_half_disk_mesh: need at least 2 electrodes");
  if (!(radius > 0.0)) throw std::invalid_argument("build_half_disk_mesh: radius must be positive");
  if (!(extent[0] < extent[1]) || !(extent[0] > -radius) || !(extent[1] < radius))
    throw std::invalid_argument("build_half_disk_mesh: extent must be inside (-radius, radius)");
  if (grading.surface_subdivision < 1 || !(grading.growth > 1.0) || !(grading.max_cell_size > 0.0))
    throw std::invalid_argument("build_half_disk_mesh: invalid grading parameters");

  const double x_lo = extent[0];
  const double x_hi = extent[1];
  const std::size_t sub = grading.surface_subdivision;
  const double h = (x_hi - x_lo) / static_cast<double>(n_electrodes - 1);
  const double hs = h / static_cast<double>(sub);

  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<std::size_t, 3>> cells;
  std::vector<std::size_t> electrodes;

  const double tail_cap0 = std::min(grading.max_cell_size, 2.0 * hs);

  // Surface row: exact electrode positions, subdivided gaps, graded tails to
  // the rim points (+-radius, 0).
  std::vector<double> row0;
  std::vector<std::size_t> electrode_slots;  // positions of electrodes within row0
  {
    const auto left_gaps = graded_gaps(x_lo + radius, hs * grading.growth, grading.growth,
                                       tail_cap0);
    double x = -radius;
    row0.push_back(x);
    for (std::size_t k = left_gaps.size(); k-- > 1;) {  // walk rim -> electrode line
      x += left_gaps[k];
      row0.push_back(x);
    }
    for (std::size_t e = 0; e + 1 < n_electrodes; ++e) {
      const double te = static_cast<double>(e) / static_cast<double>(n_electrodes - 1);
      const double xe = x_lo * (1.0 - te) + x_hi * te;
      electrode_slots.push_back(row0.size());
      row0.push_back(xe);
      for (std::size_t s = 1; s < sub; ++s) {
        const double ts = static_cast<double>(s) / static_cast<double>(sub);
        const double te2 = static_cast<double>(e + 1) / static_cast<double>(n_electrodes - 1);
        const double xe2 = x_lo * (1.0 - te2) + x_hi * te2;
        row0.push_back(xe * (1.0 - ts) + xe2 * ts);
      }
    }
    electrode_slots.push_back(row0.size());
    row0.push_back(x_hi);
    const auto right_gaps = graded_gaps(radius - x_hi, hs * grading.growth, grading.growth,
                                        tail_cap0);
    x = x_hi;
    for (std::size_t k = 0; k + 1 < right_gaps.size(); ++k) {
      x += right_gaps[k];
      row0.push_back(x);
    }
    row0.push_back(radius);
  }

  std::vector<std::size_t> prev_row(row0.size());
  for (std::size_t i = 0; i < row0.size(); ++i) {
    prev_row[i] = vertices.size();
    vertices.push_back({row0[i], 0.0});
  }
  for (std::size_t slot : electrode_slots) electrodes.push_back(prev_row[slot]);

  // Depth ladder: `sub` uniform steps span the structured surface band of
  // thickness ~h, then the step grows geometrically up to the far-field cap.
  std::vector<double> depths;
  std::vector<double> layer_heights;
  {
    double z = 0.0;
    double dz = hs;
    std::size_t uniform_left = sub;
    while (z + dz < radius) {
      z += dz;
      depths.push_back(z);
      layer_heights.push_back(dz);
      if (uniform_left > 0)
        --uniform_left;
      else
        dz = std::min(dz * grading.growth, grading.max_cell_size);
    }
    while (depths.size() > 1 &&
           radius - depths.back() < 0.35 * layer_heights.back()) {
      depths.pop_back();
      layer_heights.pop_back();
    }
  }

  // Stitch consecutive node rows with the shorter-diagonal sweep.
  const auto zipper = [&](const std::vector<std::size_t>& top, const std::vector<std::size_t>& bot) {
    std::size_t i = 0, j = 0;
    while (i + 1 < top.size() || j + 1 < bot.size()) {
      const bool can_top = i + 1 < top.size();
      const bool can_bot = j + 1 < bot.size();
      bool advance_top;
      if (!can_bot) {
        advance_top = true;
      } else if (!can_top) {
        advance_top = false;
      } else {
        const auto& a = vertices[top[i + 1]];
        const auto& b = vertices[bot[j]];
        const auto& a2 = vertices[top[i]];
        const auto& b2 = vertices[bot[j + 1]];
        const double d_top = std::hypot(a[0] - b[0], a[1] - b[1]);
        const double d_bot = std::hypot(b2[0] - a2[0], b2[1] - a2[1]);
        advance_top = d_top <= d_bot;
      }
      if (advance_top) {
        cells.push_back({top[i], top[i + 1], bot[j]});
        ++i;
      } else {
        cells.push_back({top[i], bot[j + 1], bot[j]});
        ++j;
      }
    }
  };

  for (std::size_t i = 0; i < depths.size(); ++i) {
    const double z = depths[i];
    const double dz = layer_heights[i];
    const double spacing = std::max(hs, dz);
    const double tail_cap = std::min(grading.max_cell_size, 2.0 * dz);
    const double width = std::sqrt(radius * radius - z * z);
    const std::vector<double> xs =
        row_positions(width, x_lo, x_hi, spacing, grading.growth, tail_cap);

    std::vector<std::size_t> row(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      row[k] = vertices.size();
      vertices.push_back({xs[k], z});
    }
    zipper(prev_row, row);
    prev_row = std::move(row);
  }

  // Bottom cap: fan from the deepest arc point.
  const std::size_t apex = vertices.size();
  vertices.push_back({0.0, radius});
  for (std::size_t k = 0; k + 1 < prev_row.size(); ++k)
    cells.push_back({prev_row[k], prev_row[k + 1], apex});

  return finalize_mesh(std::move(vertices), std::move(cells), std::move(electrodes));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<std::array<double, 2>> vertices = mesh.vertices;
  vertices.reserve(mesh.n_vertices() + mesh.n_edges());
  for (const auto& e : mesh.edges) {
    const auto& a = mesh.vertices[e[0]];
    const auto& b = mesh.vertices[e[1]];
    vertices.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
  }

  const auto midpoint = [&](std::size_t c, int loc) {
    return mesh.n_vertices() + mesh.cell_edges[c][static_cast<std::size_t>(loc)];
  };

  std::vector<std::array<std::size_t, 3>> cells;
  cells.reserve(4 * mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const std::size_t mab = midpoint(c, 0);  // edge (t0, t1)
    const std::size_t mbc = midpoint(c, 1);  // edge (t1, t2)
    const std::size_t mca = midpoint(c, 2);  // edge (t2, t0)
    cells.push_back({t[0], mab, mca});
    cells.push_back({mab, t[1], mbc});
    cells.push_back({mca, mbc, t[2]});
    cells.push_back({mab, mbc, mca});
  }

  return finalize_mesh(std::move(vertices), std::move(cells), mesh.electrode_nodes);
}

void write_mesh_json(const Mesh& mesh, const std::string& path) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices) j["vertices"].push_back({v[0], v[1]});
  j["cells"] = nlohmann::json::array();
  for (const auto& c : mesh.cells) j["cells"].push_back({c[0], c[1], c[2]});
  j["boundary"] = nlohmann::json::array();
  for (const auto& be : mesh.boundary_edges) {
    const auto& e = mesh.edges[be.edge];
    j["boundary"].push_back(
        {{"edge", {e[0], e[1]}},
         {"tag", be.tag == BoundaryTag::kSurface ? "SURFACE" : "FAR"}});
  }
  j["electrodes"] = mesh.electrode_nodes;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh_json: cannot open " + path);
  out << j.dump(1, '\t') << "\n";
}

Mesh read_mesh_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh_json: cannot open " + path);
  nlohmann::json j;
  in >> j;

  std::vector<std::array<double, 2>> vertices;
  for (const auto& v : j.at("vertices"))
    vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  std::vector<std::array<std::size_t, 3>> cells;
  for (const auto& c : j.at("cells"))
    cells.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>(),
                     c.at(2).get<std::size_t>()});
  std::vector<std::size_t> electrodes = j.at("electrodes").get<std::vector<std::size_t>>();

  Mesh mesh = finalize_mesh(std::move(vertices), std::move(cells), std::move(electrodes));

  // Stored tags must agree with the geometric rule used on construction.
  std::map<std::array<std::size_t, 2>, BoundaryTag> derived;
  for (const auto& be : mesh.boundary_edges) derived.emplace(mesh.edges[be.edge], be.tag);
  for (const auto& b : j.at("boundary")) {
    const std::array<std::size_t, 2> key{
        std::min(b.at("edge").at(0).get<std::size_t>(), b.at("edge").at(1).get<std::size_t>()),
        std::max(b.at("edge").at(0).get<std::size_t>(), b.at("edge").at(1).get<std::size_t>())};
    const auto it = derived.find(key);
    if (it == derived.end()) throw std::runtime_error("read_mesh_json: boundary edge not on boundary");
    const std::string tag = b.at("tag").get<std::string>();
    const bool surface = it->second == BoundaryTag::kSurface;
    if ((tag == "SURFACE") != surface)
      throw std::runtime_error("read_mesh_json: inconsistent boundary tag");
  }
  return mesh;
}

}  // namespace ertinv
