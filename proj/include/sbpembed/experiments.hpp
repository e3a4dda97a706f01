#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sbpembed/mesh.hpp"
#include "sbpembed/wave.hpp"

namespace sbpembed {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::vector<int> orders{5, 7, 9};
  /// Test hook: perturbs one quadrature weight by 1e-4 before any check.
  bool perturb_weight = false;
  int random_pairs = 100;
  unsigned seed = 2024;
};

/// Operator-identity suite over built-in meshes: 1D SBP property, quadrature
/// and differentiation exactness, per-block and multiblock Green identities,
/// interface quadrature agreement, unit normals.
std::vector<CheckResult> run_verification(const VerifyOptions& options,
                                          const std::function<void(const CheckResult&)>& on_check = {});

/// Point source in the unit disc, compared with the free-space solution.
struct CircleExperiment {
  int p = 5;
  int refinement = 1;
  double c = 1.0;
  double sigma = 0.04;
  double t_source = 0.3;
  double t_end = 0.8;
  double cfl_fraction = 0.2;
  double half_width = 0.5;
  std::string boundary = "dirichlet";
};

struct ConvergenceRow {
  int p = 0;
  int refinement = 0;
  int n_blocks = 0;
  int n_dofs = 0;
  double l2_error = 0.0;
  double log10_error = 0.0;
  double rate = 0.0;  // NaN on the first row
  long steps = 0;
  double dt = 0.0;
  double assembly_seconds = 0.0;
  double stepping_seconds = 0.0;
  bool failed = false;
  std::string failure;
};

ConvergenceRow run_circle_experiment(const CircleExperiment& experiment);

std::vector<ConvergenceRow> run_convergence(const CircleExperiment& base, int first_level, int levels,
                                            const std::function<void(const ConvergenceRow&)>& on_row = {});

/// Columns p,n_blocks,N_dofs,l2_error,log10_error,rate_q; failed rows carry
/// "FAILED" in the numeric columns.
void write_convergence_csv(const std::filesystem::path& path, const std::vector<ConvergenceRow>& rows);

struct RunConfig {
  WaveProblem problem;
  int p = 5;
  int snapshot_every = 0;  // 0: initial and final snapshots only
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

struct RunReport {
  std::string command = "run";
  std::string status = "ok";
  std::string message;
  RunConfig config;
  double assembly_seconds = 0.0;
  double stepping_seconds = 0.0;
  long steps = 0;
  double dt = 0.0;
  int n_hat = 0;
  int n_blocks = 0;
  double final_energy = 0.0;
  /// Energy never grew by more than 1e-10 relative once the source was off.
  bool energy_nonincreasing = true;
  std::string snapshot_hash;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

/// Time-steps to t_end writing snapshot_NNNNNN_t<time>.txt files, energy.csv
/// and report.json into `out_dir`. On divergence the report is written with
/// status "diverged", earlier snapshots are kept, and Divergence is thrown.
RunReport run_simulation(const MultiblockMesh& mesh, const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace sbpembed
