// Command-line driver: mesh/survey generation, synthetic forward modeling,
// inversion with the direct or preconditioned-MINRES solvers, spectral
// inclusion checks, and scaling benchmarks. Emits JSON/CSV artifacts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ertinv/amg.hpp"
#include "ertinv/fem_mixed.hpp"
#include "ertinv/forward.hpp"
#include "ertinv/inversion.hpp"
#include "ertinv/mesh.hpp"
#include "ertinv/spectral.hpp"
#include "ertinv/survey.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ertinv::GnAlgorithm parse_algorithm(const std::string& name) {
  if (name == "direct") return ertinv::GnAlgorithm::kDirect;
  if (name == "woodbury") return ertinv::GnAlgorithm::kWoodburyMinres;
  if (name == "laplace") return ertinv::GnAlgorithm::kLaplaceMinres;
  throw UsageError("unknown algorithm '" + name + "' (expected direct|woodbury|laplace)");
}

void write_manifest(const std::string& path, const nlohmann::json& files,
                    const nlohmann::json& config, double wall_seconds) {
  for (const auto& [key, value] : files.items()) {
    if (!std::filesystem::exists(value.get<std::string>()))
      throw std::runtime_error("manifest: referenced file missing: " + value.get<std::string>());
  }
  nlohmann::json j;
  j["files"] = files;
  j["config"] = config;
  j["version"] = kVersion;
  j["wall_seconds"] = wall_seconds;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(1, '\t') << "\n";
}

/// Cellwise checkerboard on [-half_width, half_width] x [0, depth_max]:
/// alternating blocks of anomaly conductivity over the background.
ertinv::ModelVector checkerboard_model(const ertinv::Mesh& mesh, double sigma0,
                                       double sigma_anomaly, double block_width,
                                       double block_depth, double half_width,
                                       double depth_max) {
  ertinv::ModelVector m(mesh.n_cells(), std::log(sigma0));
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto ctr = mesh.cell_centroid(c);
    if (std::abs(ctr[0]) > half_width || ctr[1] > depth_max) continue;
    const auto ix = static_cast<long long>(std::floor((ctr[0] + half_width) / block_width));
    const auto iz = static_cast<long long>(std::floor(ctr[1] / block_depth));
    if ((ix + iz) % 2 == 0) m[c] = std::log(sigma_anomaly);
  }
  return m;
}

struct InversionArtifacts {
  ertinv::ModelVector model;
  ertinv::GnReport report;
};

InversionArtifacts run_inversion(const ertinv::Mesh& mesh, const ertinv::Survey& survey,
                                 const ertinv::Vector& g_obs, double sigma_ref, double beta,
                                 ertinv::GnAlgorithm algorithm, std::size_t steps, double tol) {
  ertinv::GnProblem problem;
  problem.mesh = &mesh;
  problem.survey = &survey;
  problem.g_obs = g_obs;
  problem.m_ref.assign(mesh.n_cells(), std::log(sigma_ref));
  problem.m0 = problem.m_ref;

  ertinv::GnConfig config;
  config.beta = beta;
  config.max_outer_steps = steps;
  config.minres_tol = tol;
  config.algorithm = algorithm;

  auto [m, report] = ertinv::gauss_newton(problem, config);
  return {std::move(m), std::move(report)};
}

void append_report_rows(std::ostream& out, std::size_t nele, const ertinv::GnReport& report,
                        const std::string& algo, bool with_algo_column) {
  for (std::size_t s = 0; s < report.steps.size(); ++s) {
    const auto& st = report.steps[s];
    out << nele << ',' << report.n_cell_dofs << ',' << report.n_measurements << ',';
    if (with_algo_column) out << algo << ',';
    out << (s + 1) << ',' << st.minres_iters << ',' << format_double(st.t_H) << ','
        << format_double(st.t_C) << ',' << format_double(st.t_chol) << ','
        << format_double(st.t_norm) << '\n';
  }
}

ertinv::Vector synthetic_observations(const ertinv::Mesh& mesh, const ertinv::Survey& survey,
                                      const ertinv::ModelVector& true_model) {
  // Observations come from the once-refined mesh; children inherit the
  // parent's cell value.
  const ertinv::Mesh fine = ertinv::refine_uniform(mesh);
  ertinv::ModelVector fine_model(fine.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    for (std::size_t k = 0; k < 4; ++k) fine_model[4 * c + k] = true_model[c];
  ertinv::Survey fine_survey = survey;
  ertinv::attach_electrode_positions(fine_survey, fine);
  return ertinv::evaluate_response_and_jacobian(fine, fine_model, fine_survey).g;
}

int cmd_mesh(std::size_t nele, double radius, std::vector<double> extent, std::size_t sub,
             double growth, double max_cell, const std::string& out) {
  ertinv::GradingParams grading{sub, growth, max_cell};
  const ertinv::Mesh mesh =
      ertinv::build_half_disk_mesh(radius, nele, {extent[0], extent[1]}, grading);
  ertinv::write_mesh_json(mesh, out);
  std::cout << "mesh: " << mesh.n_vertices() << " vertices, " << mesh.n_cells() << " cells, "
            << mesh.n_edges() << " edges -> " << out << "\n";
  return 0;
}

int cmd_survey(std::size_t nele, std::vector<double> extent, const std::string& out) {
  const ertinv::Survey survey = ertinv::pole_dipole_survey(nele, {extent[0], extent[1]});
  ertinv::write_survey_csv(survey, out);
  std::cout << "survey: " << survey.n_measurements() << " measurements -> " << out << "\n";
  return 0;
}

int cmd_model(const std::string& mesh_path, const std::string& type, double sigma0,
              double sigma_anomaly, double block_width, double block_depth, double half_width,
              double depth_max, const std::string& out) {
  const ertinv::Mesh mesh = ertinv::read_mesh_json(mesh_path);
  ertinv::ModelVector m;
  if (type == "homogeneous") {
    m.assign(mesh.n_cells(), std::log(sigma0));
  } else if (type == "checkerboard") {
    m = checkerboard_model(mesh, sigma0, sigma_anomaly, block_width, block_depth, half_width,
                           depth_max);
  } else {
    throw UsageError("unknown model type '" + type + "'");
  }
  ertinv::write_model_json(m, out);
  std::cout << "model: " << m.size() << " cells (" << type << ") -> " << out << "\n";
  return 0;
}

int cmd_forward(const std::string& mesh_path, const std::string& survey_path,
                const std::string& model_path, const std::string& out,
                const std::string& manifest) {
  const auto t0 = Clock::now();
  const ertinv::Mesh mesh = ertinv::read_mesh_json(mesh_path);
  ertinv::Survey survey = ertinv::read_survey_csv(survey_path);
  ertinv::attach_electrode_positions(survey, mesh);
  const ertinv::ModelVector model = ertinv::read_model_json(model_path);
  if (model.size() != mesh.n_cells())
    throw std::runtime_error("forward: model size does not match mesh cell count");

  const ertinv::Vector g_obs = synthetic_observations(mesh, survey, model);
  ertinv::write_observations_csv(g_obs, out);
  std::cout << "forward: " << g_obs.size() << " observations -> " << out << "\n";

  if (!manifest.empty()) {
    write_manifest(manifest,
                   {{"mesh", mesh_path},
                    {"survey", survey_path},
                    {"model", model_path},
                    {"observations", out}},
                   {{"command", "forward"}}, seconds_since(t0));
  }
  return 0;
}

int cmd_invert(const std::string& mesh_path, const std::string& survey_path,
               const std::string& obs_path, double beta, const std::string& algo,
               std::size_t steps, double tol, double sigma_ref, const std::string& out,
               const std::string& report_path, const std::string& manifest) {
  if (!(beta > 0.0)) throw UsageError("--beta must be positive");
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  if (steps == 0) throw UsageError("--steps must be at least 1");
  if (!(sigma_ref > 0.0)) throw UsageError("--sigma-ref must be positive");
  const ertinv::GnAlgorithm algorithm = parse_algorithm(algo);

  const auto t0 = Clock::now();
  const ertinv::Mesh mesh = ertinv::read_mesh_json(mesh_path);
  ertinv::Survey survey = ertinv::read_survey_csv(survey_path);
  ertinv::attach_electrode_positions(survey, mesh);
  const ertinv::Vector g_obs = ertinv::read_observations_csv(obs_path);
  if (g_obs.size() != survey.n_measurements())
    throw std::runtime_error("invert: observation count does not match survey");

  const InversionArtifacts result =
      run_inversion(mesh, survey, g_obs, sigma_ref, beta, algorithm, steps, tol);
  ertinv::write_result_json(result.model, result.report, out);

  if (!report_path.empty()) {
    std::ofstream rep(report_path);
    if (!rep) throw std::runtime_error("cannot open " + report_path);
    rep << "nele,N,M,step,n_iter,t_H,t_C,t_chol,t_norm\n";
    append_report_rows(rep, survey.n_electrodes(), result.report, algo, false);
  }
  for (std::size_t s = 0; s < result.report.steps.size(); ++s) {
    const auto& st = result.report.steps[s];
    std::cout << "step " << (s + 1) << ": misfit " << st.misfit << ", n_iter "
              << st.minres_iters << ", t_norm " << st.t_norm << " s\n";
  }
  std::cout << "final misfit " << result.report.final_misfit << " -> " << out << "\n";

  if (!manifest.empty()) {
    nlohmann::json files = {{"mesh", mesh_path},
                            {"survey", survey_path},
                            {"observations", obs_path},
                            {"result", out}};
    if (!report_path.empty()) files["report"] = report_path;
    write_manifest(manifest, files,
                   {{"command", "invert"},
                    {"beta", beta},
                    {"algo", algo},
                    {"steps", steps},
                    {"tol", tol},
                    {"sigma_ref", sigma_ref}},
                   seconds_since(t0));
  }
  return 0;
}

int cmd_bench(std::vector<std::size_t> neles, const std::string& algos_arg, double beta,
              std::size_t steps, double tol, const std::string& out) {
  if (!(beta > 0.0)) throw UsageError("--beta must be positive");
  std::vector<std::string> algos;
  {
    std::string token;
    for (char ch : algos_arg + ",") {
      if (ch == ',') {
        if (!token.empty()) algos.push_back(token);
        token.clear();
      } else {
        token.push_back(ch);
      }
    }
    if (algos.empty()) throw UsageError("--algos must name at least one algorithm");
    for (const auto& a : algos) parse_algorithm(a);
  }

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot open " + out);
  csv << "nele,N,M,algo,step,n_iter,t_H,t_C,t_chol,t_norm,status\n";

  const double sigma_ref = 1.0 / 3500.0;
  for (std::size_t nele : neles) {
    try {
      const ertinv::Mesh mesh = ertinv::build_half_disk_mesh(80.0, nele, {-50.0, 50.0});
      ertinv::Survey survey = ertinv::pole_dipole_survey(nele, {-50.0, 50.0});
      ertinv::attach_electrode_positions(survey, mesh);
      const ertinv::ModelVector truth =
          checkerboard_model(mesh, sigma_ref, 1.0 / 7000.0, 25.0, 12.5, 50.0, 25.0);
      const ertinv::Vector g_obs = synthetic_observations(mesh, survey, truth);

      for (const auto& algo : algos) {
        try {
          const InversionArtifacts result = run_inversion(
              mesh, survey, g_obs, sigma_ref, beta, parse_algorithm(algo), steps, tol);
          for (std::size_t s = 0; s < result.report.steps.size(); ++s) {
            const auto& st = result.report.steps[s];
            csv << nele << ',' << result.report.n_cell_dofs << ','
                << result.report.n_measurements << ',' << algo << ',' << (s + 1) << ','
                << st.minres_iters << ',' << format_double(st.t_H) << ','
                << format_double(st.t_C) << ',' << format_double(st.t_chol) << ','
                << format_double(st.t_norm) << ",ok\n";
          }
          std::cout << "bench nele=" << nele << " algo=" << algo << " done\n";
        } catch (const std::exception& e) {
          csv << nele << ",0,0," << algo << ",0,0,0,0,0,0,error\n";
          std::cerr << "bench nele=" << nele << " algo=" << algo << " failed: " << e.what()
                    << "\n";
        }
      }
    } catch (const std::exception& e) {
      for (const auto& algo : algos) csv << nele << ",0,0," << algo << ",0,0,0,0,0,0,error\n";
      std::cerr << "bench nele=" << nele << " setup failed: " << e.what() << "\n";
    }
  }
  std::cout << "bench -> " << out << "\n";
  return 0;
}

int cmd_spectrum(const std::string& mesh_path, double beta, std::size_t n_rows,
                 unsigned long seed, std::size_t dof_cap, const std::string& out) {
  if (!(beta > 0.0)) throw UsageError("--beta must be positive");
  const ertinv::Mesh mesh = ertinv::read_mesh_json(mesh_path);
  const ertinv::MixedSpaces spaces = ertinv::make_mixed_spaces(mesh);
  const std::size_t total = spaces.n_flux_dofs + spaces.n_cell_dofs;
  if (total > dof_cap)
    throw std::runtime_error("spectrum: K+N = " + std::to_string(total) +
                             " exceeds the dof cap " + std::to_string(dof_cap) +
                             " (dense eigenproblem refused)");

  const ertinv::SparseMatrix Q = ertinv::assemble_Q(spaces);
  const ertinv::SparseMatrix D = ertinv::assemble_D(spaces);

  ertinv::DenseMatrix J(n_rows, spaces.n_cell_dofs);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : J.values) v = normal(rng);

  const ertinv::DenseMatrix A = ertinv::dense_saddle_matrix(Q, D, J, beta);
  const ertinv::DenseMatrix P = ertinv::dense_ideal_preconditioner(Q, D, J, beta);
  const std::vector<double> eigenvalues = ertinv::preconditioned_eigenvalues(A, P);

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  bool inside = true;
  for (double ev : eigenvalues) {
    const bool neg = ev >= -1.0 - 1e-8 && ev <= -1.0 / phi + 1e-8;
    const bool pos = ev >= 1.0 - 1e-8 && ev <= phi + 1e-8;
    if (!neg && !pos) inside = false;
  }

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot open " + out);
  csv << "index,eigenvalue\n";
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    csv << i << ',' << format_double(eigenvalues[i]) << '\n';

  std::cout << "spectrum: " << eigenvalues.size() << " eigenvalues, phi = "
            << format_double(phi) << ", inclusion [-1,-1/phi] U [1,phi]: "
            << (inside ? "PASS" : "FAIL") << " -> " << out << "\n";
  return inside ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D ERT parameter identification with Woodbury-preconditioned saddle solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "generate the graded half-disk mesh");
  std::size_t nele = 17;
  double radius = 80.0;
  std::vector<double> extent{-50.0, 50.0};
  std::size_t sub = 2;
  double growth = 1.4;
  double max_cell = 8.0;
  std::string out_path = "mesh.json";
  mesh_cmd->add_option("--nele", nele, "number of electrodes")->check(CLI::Range(2, 1 << 20));
  mesh_cmd->add_option("--radius", radius, "half-disk radius");
  mesh_cmd->add_option("--extent", extent, "electrode line [lo hi]")->expected(2);
  mesh_cmd->add_option("--sub", sub, "surface nodes per electrode gap")->check(CLI::Range(1, 64));
  mesh_cmd->add_option("--growth", growth, "geometric coarsening rate");
  mesh_cmd->add_option("--max-cell", max_cell, "far-field cell size cap");
  mesh_cmd->add_option("--out", out_path, "output mesh JSON");

  // survey
  auto* survey_cmd = app.add_subcommand("survey", "generate the pole-dipole survey");
  std::size_t survey_nele = 17;
  std::vector<double> survey_extent{-50.0, 50.0};
  std::string survey_out = "survey.csv";
  survey_cmd->add_option("--nele", survey_nele, "number of electrodes")
      ->check(CLI::Range(17, 1 << 20));
  survey_cmd->add_option("--extent", survey_extent, "electrode line [lo hi]")->expected(2);
  survey_cmd->add_option("--out", survey_out, "output survey CSV");

  // model
  auto* model_cmd = app.add_subcommand("model", "generate a cellwise conductivity model");
  std::string model_mesh, model_type = "checkerboard", model_out = "model.json";
  double sigma0 = 1.0 / 3500.0;
  double sigma_anomaly = 1.0 / 7000.0;
  double block_width = 25.0, block_depth = 12.5, half_width = 50.0, depth_max = 25.0;
  model_cmd->add_option("--mesh", model_mesh, "mesh JSON")->required();
  model_cmd->add_option("--type", model_type, "homogeneous|checkerboard");
  model_cmd->add_option("--sigma0", sigma0, "background conductivity");
  model_cmd->add_option("--sigma-anomaly", sigma_anomaly, "anomaly conductivity");
  model_cmd->add_option("--block-width", block_width, "checker block width");
  model_cmd->add_option("--block-depth", block_depth, "checker block depth");
  model_cmd->add_option("--half-width", half_width, "pattern half width");
  model_cmd->add_option("--depth-max", depth_max, "pattern depth");
  model_cmd->add_option("--out", model_out, "output model JSON");

  // forward
  auto* fwd_cmd = app.add_subcommand("forward", "synthesize observations on a refined mesh");
  std::string fwd_mesh, fwd_survey, fwd_model, fwd_out = "obs.csv", fwd_manifest;
  fwd_cmd->add_option("--mesh", fwd_mesh, "mesh JSON")->required();
  fwd_cmd->add_option("--survey", fwd_survey, "survey CSV")->required();
  fwd_cmd->add_option("--model", fwd_model, "true model JSON")->required();
  fwd_cmd->add_option("--out", fwd_out, "output observations CSV");
  fwd_cmd->add_option("--manifest", fwd_manifest, "optional run manifest JSON");

  // invert
  auto* inv_cmd = app.add_subcommand("invert", "run the Gauss-Newton inversion");
  std::string inv_mesh, inv_survey, inv_obs, inv_algo = "woodbury";
  std::string inv_out = "result.json", inv_report, inv_manifest;
  double inv_beta = 0.1, inv_tol = 1e-7, inv_sigma_ref = 1.0 / 3500.0;
  std::size_t inv_steps = 2;
  inv_cmd->add_option("--mesh", inv_mesh, "mesh JSON")->required();
  inv_cmd->add_option("--survey", inv_survey, "survey CSV")->required();
  inv_cmd->add_option("--obs", inv_obs, "observations CSV")->required();
  inv_cmd->add_option("--beta", inv_beta, "regularization parameter");
  inv_cmd->add_option("--algo", inv_algo, "direct|woodbury|laplace");
  inv_cmd->add_option("--steps", inv_steps, "Gauss-Newton steps");
  inv_cmd->add_option("--tol", inv_tol, "MINRES relative tolerance");
  inv_cmd->add_option("--sigma-ref", inv_sigma_ref, "reference conductivity");
  inv_cmd->add_option("--out", inv_out, "result JSON");
  inv_cmd->add_option("--report", inv_report, "per-step report CSV");
  inv_cmd->add_option("--manifest", inv_manifest, "optional run manifest JSON");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "scaling benchmark across survey sizes");
  std::vector<std::size_t> bench_neles{17, 33, 65};
  std::string bench_algos = "woodbury,laplace", bench_out = "bench.csv";
  double bench_beta = 0.1, bench_tol = 1e-7;
  std::size_t bench_steps = 2;
  bench_cmd->add_option("--nele", bench_neles, "electrode counts");
  bench_cmd->add_option("--algos", bench_algos, "comma-separated algorithms");
  bench_cmd->add_option("--beta", bench_beta, "regularization parameter");
  bench_cmd->add_option("--steps", bench_steps, "Gauss-Newton steps");
  bench_cmd->add_option("--tol", bench_tol, "MINRES relative tolerance");
  bench_cmd->add_option("--out", bench_out, "output CSV");

  // spectrum
  auto* spec_cmd = app.add_subcommand("spectrum", "eigenvalues of the preconditioned operator");
  std::string spec_mesh, spec_out = "spectrum.csv";
  double spec_beta = 1.0;
  std::size_t spec_m = 5, spec_cap = 500;
  unsigned long spec_seed = 0;
  spec_cmd->add_option("--mesh", spec_mesh, "mesh JSON (small)")->required();
  spec_cmd->add_option("--beta", spec_beta, "regularization parameter");
  spec_cmd->add_option("--M", spec_m, "rows of the random Jacobian (0 for none)");
  spec_cmd->add_option("--seed", spec_seed, "RNG seed");
  spec_cmd->add_option("--dof-cap", spec_cap, "refuse above this K+N");
  spec_cmd->add_option("--out", spec_out, "eigenvalue CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (mesh_cmd->parsed())
      return cmd_mesh(nele, radius, extent, sub, growth, max_cell, out_path);
    if (survey_cmd->parsed()) return cmd_survey(survey_nele, survey_extent, survey_out);
    if (model_cmd->parsed())
      return cmd_model(model_mesh, model_type, sigma0, sigma_anomaly, block_width, block_depth,
                       half_width, depth_max, model_out);
    if (fwd_cmd->parsed()) return cmd_forward(fwd_mesh, fwd_survey, fwd_model, fwd_out, fwd_manifest);
    if (inv_cmd->parsed())
      return cmd_invert(inv_mesh, inv_survey, inv_obs, inv_beta, inv_algo, inv_steps, inv_tol,
                        inv_sigma_ref, inv_out, inv_report, inv_manifest);
    if (bench_cmd->parsed())
      return cmd_bench(bench_neles, bench_algos, bench_beta, bench_steps, bench_tol, bench_out);
    if (spec_cmd->parsed())
      return cmd_spectrum(spec_mesh, spec_beta, spec_m, spec_seed, spec_cap, spec_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
