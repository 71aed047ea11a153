#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vibrom/dpim.hpp"
#include "vibrom/fom.hpp"
#include "vibrom/frfarc.hpp"
#include "vibrom/hb.hpp"
#include "vibrom/io.hpp"
#include "vibrom/romdl.hpp"

namespace vibrom {

// End-to-end orchestration of the five pipeline commands. Each command
// throws: ConfigError for unusable configuration, SolverError when a
// numerical stage fails, StaleArtifactError when an on-disk artifact does
// not match the current configuration hash.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StaleArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::string benchmark;
  ParamMap benchmark_params;

  FrfSettings frf;

  std::vector<double> train_betas;
  std::vector<double> test_betas;

  int n_regions = 2;
  std::vector<int> landmark_overrides;  // interior point indices, optional
  int points_per_curve = 32;
  int samples_per_period = 161;

  int pod_dim = 20;
  int rsvd_oversampling = 10;
  int rsvd_power_iters = 2;
  TrainingConfig training;
  std::vector<int> p_sweep = {1, 2, 3};

  int infer_points = 65;
  int report_points = 33;

  int master_mode = 0;
  int plot_mode = 1;

  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::string hash;  // FNV-1a of the canonical config text + effective seed
};

// Parses and validates a config file; `out_override`/`seed_override`
// (empty / negative = keep file values) mirror the CLI flags.
PipelineConfig load_pipeline_config(const std::string& path,
                                    const std::string& out_override = "",
                                    long long seed_override = -1);

void cmd_snapshots(const PipelineConfig& cfg);
void cmd_dpim(const PipelineConfig& cfg);
void cmd_train(const PipelineConfig& cfg);
void cmd_infer(const PipelineConfig& cfg);
void cmd_report(const PipelineConfig& cfg);

// Training-family curves reloaded from a snapshot bundle, with their
// arc-length parametrizations rebuilt from the stored (s, omega, A) tables.
struct LoadedFamily {
  std::vector<FrfCurve> curves;  // owns the point storage
  std::vector<ArcParametrizedFrf> parametrized;
  std::vector<double> betas;
  int n_regions = 0;
  std::string hash;  // config hash recorded in the bundle manifest
};

LoadedFamily load_family(const std::string& snapshot_dir);

// Maps an exception already in flight to the documented process exit code
// (0 success, 2 config, 3 solver, 4 stale artifact).
int run_command(const std::string& name, const PipelineConfig& cfg);

}  // namespace vibrom
