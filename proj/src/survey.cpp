#include "ertinv/survey.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ertinv/mesh.hpp"

namespace ertinv {

namespace {

double distance(const std::array<double, 3>& p, const std::array<double, 3>& q) {
  return std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                   (p[2] - q[2]) * (p[2] - q[2]));
}

}  // namespace

double geometric_factor(const std::array<double, 3>& a,
                        const std::optional<std::array<double, 3>>& b,
                        const std::array<double, 3>& m,
                        const std::array<double, 3>& n, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("geometric_factor: dim must be 2 or 3");
  const double am = distance(a, m);
  const double an = distance(a, n);
  if (am == 0.0 || an == 0.0 || distance(m, n) == 0.0 ||
      (b && (distance(*b, m) == 0.0 || distance(*b, n) == 0.0 || distance(a, *b) == 0.0)))
    throw std::invalid_argument("geometric_factor: coincident electrodes");

  double denom;
  if (dim == 2) {
    denom = -std::log(am) + std::log(an);
    if (b) denom += std::log(distance(*b, m)) - std::log(distance(*b, n));
    if (std::abs(denom) < 1e-14)
      throw std::runtime_error("geometric_factor: degenerate configuration (zero log ratio)");
    return M_PI / denom;
  }
  denom = 1.0 / am - 1.0 / an;
  if (b) denom += -1.0 / distance(*b, m) + 1.0 / distance(*b, n);
  if (std::abs(denom) < 1e-14)
    throw std::runtime_error("geometric_factor: degenerate configuration (zero denominator)");
  return 2.0 * M_PI / denom;
}

Survey pole_dipole_survey(std::size_t n_electrodes, std::array<double, 2> extent) {
  if (n_electrodes < 17)
    throw std::invalid_argument("pole_dipole_survey: need at least 17 electrodes");
  if (!(extent[0] < extent[1]))
    throw std::invalid_argument("pole_dipole_survey: empty extent");

  Survey survey;
  survey.electrode_positions.resize(n_electrodes);
  for (std::size_t e = 0; e < n_electrodes; ++e) {
    const double t = static_cast<double>(e) / static_cast<double>(n_electrodes - 1);
    survey.electrode_positions[e] = extent[0] * (1.0 - t) + extent[1] * t;
  }

  const auto pos = [&](std::size_t e) -> std::array<double, 3> {
    return {survey.electrode_positions[e], 0.0, 0.0};
  };
  const auto add = [&](std::size_t a, std::size_t m, std::size_t n) {
    ElectrodeConfig cfg;
    cfg.a = a;
    cfg.b = kPoleAtInfinity;
    cfg.m = m;
    cfg.n = n;
    cfg.k = geometric_factor(pos(a), std::nullopt, pos(m), pos(n), 2);
    survey.configs.push_back(cfg);
  };

  for (std::size_t s : {std::size_t{2}, std::size_t{4}, std::size_t{8}}) {
    for (std::size_t p = 0; p + 2 * s < n_electrodes; ++p) add(p, p + s, p + 2 * s);
    for (std::size_t p = 2 * s; p < n_electrodes; ++p) add(p, p - s, p - 2 * s);
  }
  return survey;
}

void write_survey_csv(const Survey& survey, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_survey_csv: cannot open " + path);
  out << "index,iA,iB,iM,iN,k\n";
  char buf[64];
  for (std::size_t i = 0; i < survey.configs.size(); ++i) {
    const auto& c = survey.configs[i];
    std::snprintf(buf, sizeof buf, "%.17g", c.k);
    out << i << ',' << c.a << ',' << c.b << ',' << c.m << ',' << c.n << ',' << buf << '\n';
  }
}

Survey read_survey_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_survey_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,iA,iB,iM,iN,k", 0) != 0)
    throw std::runtime_error("read_survey_csv: bad header in " + path);

  Survey survey;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    ElectrodeConfig cfg;
    std::size_t index;
    char comma;
    long long b;
    if (!(ss >> index >> comma >> cfg.a >> comma >> b >> comma >> cfg.m >> comma >> cfg.n >>
          comma >> cfg.k))
      throw std::runtime_error("read_survey_csv: malformed row in " + path);
    cfg.b = static_cast<std::ptrdiff_t>(b);
    survey.configs.push_back(cfg);
  }
  return survey;
}

void attach_electrode_positions(Survey& survey, const Mesh& mesh) {
  survey.electrode_positions.resize(mesh.electrode_nodes.size());
  for (std::size_t e = 0; e < mesh.electrode_nodes.size(); ++e)
    survey.electrode_positions[e] = mesh.vertices[mesh.electrode_nodes[e]][0];
  for (const auto& c : survey.configs) {
    const std::size_t top = survey.electrode_positions.size();
    if (c.a >= top || c.m >= top || c.n >= top ||
        (c.b != kPoleAtInfinity && (c.b < 0 || static_cast<std::size_t>(c.b) >= top)))
      throw std::runtime_error("attach_electrode_positions: electrode index out of range");
  }
}

}  // namespace ertinv
