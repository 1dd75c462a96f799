#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ertinv {

constexpr std::ptrdiff_t kPoleAtInfinity = -1;

/// One pole-dipole measurement: current electrode a, return electrode b
/// (index or pole at infinity), receiver dipole (m, n), geometric factor k.
struct ElectrodeConfig {
  std::size_t a = 0;
  std::ptrdiff_t b = kPoleAtInfinity;
  std::size_t m = 0;
  std::size_t n = 0;
  double k = 0.0;
};

struct Survey {
  std::vector<double> electrode_positions;  // x on the surface, strictly increasing
  std::vector<ElectrodeConfig> configs;

  std::size_t n_measurements() const { return configs.size(); }
  std::size_t n_electrodes() const { return electrode_positions.size(); }
};

/// Geometric factor scaling a voltage difference to apparent resistivity.
/// Pass std::nullopt for an electrode at infinity (its terms vanish).
double geometric_factor(const std::array<double, 3>& a,
                        const std::optional<std::array<double, 3>>& b,
                        const std::array<double, 3>& m,
                        const std::array<double, 3>& n, int dim);

/// Pole-dipole survey over n_electrodes equidistant positions: for each index
/// spacing s in {2, 4, 8}, forward triples (p, p+s, p+2s) followed by reversed
/// triples (p, p-s, p-2s), blocks concatenated in spacing order. M = 6n - 56.
Survey pole_dipole_survey(std::size_t n_electrodes, std::array<double, 2> extent);

void write_survey_csv(const Survey& survey, const std::string& path);

/// Reads configurations; electrode positions are recovered from the mesh via
/// attach_electrode_positions.
Survey read_survey_csv(const std::string& path);

struct Mesh;
void attach_electrode_positions(Survey& survey, const Mesh& mesh);

}  // namespace ertinv
