#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sirs/model.hpp"
#include "sirs/particle_filter.hpp"
#include "sirs/pmmh.hpp"
#include "sirs/simulate.hpp"

namespace sirs {

enum class ForcingMode { kSinusoid, kConstant, kCovariates };

std::string_view to_string(ForcingMode mode);

struct ForcingConfig {
  ForcingMode mode = ForcingMode::kSinusoid;
  double period_days = 365.0;
  // Modelled window [start_day, end_day); must cover every day simulated,
  // filtered or predicted.
  std::int64_t start_day = 0;
  std::int64_t end_day = 0;
  std::int64_t kappa = 21;
  double knot_spacing = 30.0;
  // Covariates used, in design-column order; empty means all, in file order.
  std::vector<std::string> covariates;
};

struct SimulateConfig {
  std::optional<double> obs_start;  // defaults to the window start
  std::optional<double> obs_end;    // defaults to the last window day
  double obs_interval = 14.0;
};

struct PredictConfig {
  std::vector<double> cutoffs;
  double horizon_days = 28.0;
  std::size_t draws = 500;
  std::size_t replicates = 1;
  bool per_draw_means = false;
  // With covariate forcing, refuse horizons past cutoff + kappa.
  bool respect_lag = true;
  // Given a posterior, re-filter its draws to each cutoff before predicting.
  bool refilter = false;
};

struct DiagnoseConfig {
  std::size_t residual_simulations = 5000;
  SimMethod residual_method = SimMethod::kTauLeap;
  std::size_t decomposition_samples = 5000;
};

struct BaselineConfig {
  // Train on observations up to this day; predict every later window day.
  std::optional<double> cutoff;
};

// Paths and the cutoff supplied on the command line, echoed into manifests.
struct Inputs {
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> covariates;
  std::optional<std::filesystem::path> posterior;
  std::optional<double> cutoff_day;
};

struct RunConfig {
  std::uint64_t seed = 0;
  // True values for simulation; fixed values for masked components.
  ModelParams model;
  // Chain starting point; defaults to `model`.
  std::optional<ModelParams> init;
  PriorSpec prior;
  ForcingConfig forcing;
  ChainSchedule schedule;
  std::vector<double> step_sds;
  std::optional<double> final_scale;
  SimConfig sim;
  Resampling resampling = Resampling::kMultinomial;
  SimulateConfig simulate;
  PredictConfig predict;
  DiagnoseConfig diagnose;
  BaselineConfig baseline;
  Inputs inputs;

  // Throws ConfigError on any inconsistency.
  void validate() const;
  ModelParams start_params() const { return init ? *init : model; }
};

// Parses the sectioned key = value format. Unknown sections or keys, a
// missing seed and malformed values are ConfigErrors. `[manifest]` is
// accepted and ignored.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& path);

// Canonical text holding every setting; parse_config(to_ini(c)) == c in
// all fields that influence a run.
std::string to_ini(const RunConfig& config);

// Section [manifest] with the pipeline and version, then to_ini(config).
std::string manifest_text(const RunConfig& config, const std::string& pipeline);
// Pipeline name stored in a manifest; ConfigError when absent.
std::string manifest_pipeline(const std::filesystem::path& path);

}  // namespace sirs
