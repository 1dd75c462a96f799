#include "ertinv/forward.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace ertinv {

namespace {

struct CellGeometry {
  double area;
  // Barycentric gradients, one (x, z) pair per local vertex.
  std::array<std::array<double, 2>, 3> grad;
};

CellGeometry cell_geometry(const Mesh& mesh, std::size_t c) {
  const auto& t = mesh.cells[c];
  const auto& p0 = mesh.vertices[t[0]];
  const auto& p1 = mesh.vertices[t[1]];
  const auto& p2 = mesh.vertices[t[2]];
  CellGeometry geo;
  geo.area = mesh.cell_area(c);
  const double inv2a = 1.0 / (2.0 * geo.area);
  // grad(lambda_i) = rot90(p_{i+2} - p_{i+1}) / (2 area), rot90(v) = (-v_z, v_x)
  geo.grad[0] = {-(p2[1] - p1[1]) * inv2a, (p2[0] - p1[0]) * inv2a};
  geo.grad[1] = {-(p0[1] - p2[1]) * inv2a, (p0[0] - p2[0]) * inv2a};
  geo.grad[2] = {-(p1[1] - p0[1]) * inv2a, (p1[0] - p0[0]) * inv2a};
  return geo;
}

}  // namespace

ForwardSystem assemble_forward(const Mesh& mesh, const ModelVector& m) {
  if (m.size() != mesh.n_cells())
    throw std::invalid_argument("assemble_forward: model size mismatch");

  ForwardSystem sys;
  sys.node_to_free.assign(mesh.n_vertices(), 0);
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag == BoundaryTag::kFar) {
      sys.node_to_free[mesh.edges[be.edge][0]] = -1;
      sys.node_to_free[mesh.edges[be.edge][1]] = -1;
    }
  }
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    if (sys.node_to_free[v] == 0) {
      sys.node_to_free[v] = static_cast<std::ptrdiff_t>(sys.free_to_node.size());
      sys.free_to_node.push_back(v);
    }
  }

  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const double sigma = std::exp(m[c]);
    const auto& t = mesh.cells[c];
    for (int i = 0; i < 3; ++i) {
      const std::ptrdiff_t fi = sys.node_to_free[t[static_cast<std::size_t>(i)]];
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const std::ptrdiff_t fj = sys.node_to_free[t[static_cast<std::size_t>(j)]];
        if (fj < 0) continue;
        const double kij =
            sigma * geo.area *
            (geo.grad[static_cast<std::size_t>(i)][0] * geo.grad[static_cast<std::size_t>(j)][0] +
             geo.grad[static_cast<std::size_t>(i)][1] * geo.grad[static_cast<std::size_t>(j)][1]);
        trip.push_back({static_cast<std::size_t>(fi), static_cast<std::size_t>(fj), kij});
      }
    }
  }
  sys.stiffness = from_triplets(sys.free_to_node.size(), sys.free_to_node.size(), std::move(trip));
  sys.factor = std::make_unique<Factorization>(sys.stiffness);
  return sys;
}

Vector solve_unit_pole(const ForwardSystem& system, std::size_t node) {
  if (node >= system.node_to_free.size())
    throw std::invalid_argument("solve_unit_pole: node index out of range");
  const std::ptrdiff_t free = system.node_to_free[node];
  if (free < 0)
    throw std::invalid_argument("solve_unit_pole: electrode sits on the grounded boundary");

  Vector rhs(system.free_to_node.size(), 0.0);
  rhs[static_cast<std::size_t>(free)] = 1.0;
  const Vector u_free = system.factor->solve(rhs);

  Vector u(system.node_to_free.size(), 0.0);
  for (std::size_t k = 0; k < system.free_to_node.size(); ++k)
    u[system.free_to_node[k]] = u_free[k];
  return u;
}

ResponseJacobian evaluate_response_and_jacobian(const Mesh& mesh, const ModelVector& m,
                                                const Survey& survey) {
  if (survey.electrode_positions.size() != mesh.electrode_nodes.size())
    throw std::invalid_argument("evaluate_response_and_jacobian: electrode count mismatch");
  double scale = 0.0;
  for (const auto& v : mesh.vertices) scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
  for (std::size_t e = 0; e < survey.electrode_positions.size(); ++e) {
    const auto& v = mesh.vertices[mesh.electrode_nodes[e]];
    if (std::abs(v[0] - survey.electrode_positions[e]) > 1e-9 * scale ||
        std::abs(v[1]) > 1e-9 * scale)
      throw std::invalid_argument(
          "evaluate_response_and_jacobian: survey electrode is not a mesh node");
  }

  const ForwardSystem sys = assemble_forward(mesh, m);
  const std::size_t n_ele = mesh.electrode_nodes.size();
  const std::size_t n_cells = mesh.n_cells();

  // One pole solve per unique electrode; cellwise P1 gradients cached.
  std::vector<char> used(n_ele, 0);
  for (const auto& c : survey.configs) {
    used[c.a] = used[c.m] = used[c.n] = 1;
    if (c.b != kPoleAtInfinity) used[static_cast<std::size_t>(c.b)] = 1;
  }
  std::vector<Vector> grad_x(n_ele), grad_z(n_ele);
  std::vector<CellGeometry> geo(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) geo[c] = cell_geometry(mesh, c);

  for (std::size_t e = 0; e < n_ele; ++e) {
    if (!used[e]) continue;
    const Vector u = solve_unit_pole(sys, mesh.electrode_nodes[e]);
    grad_x[e].assign(n_cells, 0.0);
    grad_z[e].assign(n_cells, 0.0);
    for (std::size_t c = 0; c < n_cells; ++c) {
      const auto& t = mesh.cells[c];
      double gx = 0.0, gz = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        gx += u[t[i]] * geo[c].grad[i][0];
        gz += u[t[i]] * geo[c].grad[i][1];
      }
      grad_x[e][c] = gx;
      grad_z[e][c] = gz;
    }
  }

  const std::size_t n_meas = survey.configs.size();
  ResponseJacobian rj;
  rj.g.assign(n_meas, 0.0);
  rj.J = DenseMatrix(n_meas, n_cells);

  for (std::size_t i = 0; i < n_meas; ++i) {
    const auto& cfg = survey.configs[i];
    double* jrow = &rj.J.values[i * n_cells];
    double gi = 0.0;
    for (std::size_t c = 0; c < n_cells; ++c) {
      double tx = grad_x[cfg.a][c];
      double tz = grad_z[cfg.a][c];
      if (cfg.b != kPoleAtInfinity) {
        tx -= grad_x[static_cast<std::size_t>(cfg.b)][c];
        tz -= grad_z[static_cast<std::size_t>(cfg.b)][c];
      }
      const double rx = grad_x[cfg.m][c] - grad_x[cfg.n][c];
      const double rz = grad_z[cfg.m][c] - grad_z[cfg.n][c];
      const double term = cfg.k * std::exp(m[c]) * geo[c].area * (tx * rx + tz * rz);
      gi += term;
      jrow[c] = -term;  // J 1 = -g exactly, term by term
    }
    rj.g[i] = gi;
    if (!std::isfinite(gi))
      throw std::runtime_error("evaluate_response_and_jacobian: non-finite response");
  }
  return rj;
}

void write_model_json(const ModelVector& m, const std::string& path) {
  nlohmann::json j;
  j["m"] = m;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_model_json: cannot open " + path);
  out << j.dump(1, '\t') << "\n";
}

ModelVector read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_model_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j.at("m").get<ModelVector>();
}

void write_observations_csv(const Vector& g_obs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_observations_csv: cannot open " + path);
  out << "index,g_obs\n";
  char buf[64];
  for (std::size_t i = 0; i < g_obs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", g_obs[i]);
    out << i << ',' << buf << '\n';
  }
}

Vector read_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_observations_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,g_obs", 0) != 0)
    throw std::runtime_error("read_observations_csv: bad header in " + path);
  Vector g;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t index;
    char comma;
    double v;
    if (!(ss >> index >> comma >> v))
      throw std::runtime_error("read_observations_csv: malformed row in " + path);
    g.push_back(v);
  }
  return g;
}

}  // namespace ertinv
