#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sirs/forcing.hpp"
#include "sirs/model.hpp"
#include "sirs/observation.hpp"
#include "sirs/particle_filter.hpp"
#include "sirs/pmmh.hpp"
#include "sirs/random.hpp"
#include "sirs/simulate.hpp"

namespace sirs {

inline constexpr std::array<double, 3> kCentralLevels{0.025, 0.5, 0.975};

struct PredictOptions {
  // Last training time T; draws carry the hidden state at T.
  double cutoff = 0.0;
  // Predictions cover (cutoff, horizon_end].
  double horizon_end = 0.0;
  // Times at which counts are emitted; all must lie in the horizon.
  std::vector<double> observation_times;
  std::size_t draws_used = 500;
  std::size_t replicates_per_draw = 1;
  SimConfig sim;
  // Average the replicates of each draw and report quantiles over draws of
  // those means, for comparison with a regression mean curve.
  bool per_draw_means = false;
  // Last day on which covariate forcing is known (cutoff + kappa for
  // lagged covariates); unset for closed-form forcing.
  std::optional<double> forcing_known_until;
  std::optional<std::int64_t> lag_days;
  Execution execution = Execution::kParallel;
};

struct HiddenQuantiles {
  std::int64_t day = 0;
  std::array<double, 3> s_fraction{};
  std::array<double, 3> i_fraction{};
};

struct PredictionRun {
  double cutoff = 0.0;
  double horizon_end = 0.0;
  std::size_t draws_used = 0;
  std::size_t replicates_per_draw = 0;
  std::vector<double> times;
  // Empirical distribution of the predicted count at each time.
  std::vector<std::map<std::int64_t, double>> counts;
  // Central 95% interval and median of the predicted count at each time.
  std::vector<std::array<double, 3>> count_quantiles;
  // Per-day quantiles of S/N and I/N over the integer days of [cutoff, horizon_end].
  std::vector<HiddenQuantiles> hidden;
  // Filled only in per-draw-means mode.
  std::vector<std::array<double, 3>> mean_count_quantiles;
};

// Evenly spaced subset of at most `count` indices into [0, total).
std::vector<std::size_t> thin_indices(std::size_t total, std::size_t count);

// Simulates forward from each used draw's (S_T, I_T) under its parameters
// and forcing, emitting Binomial(I, rho) counts at the observation times.
// Every draw must carry natural parameters. DataError when the horizon
// runs past the forcing (naming the lag limit when one is set).
PredictionRun posterior_predict(std::span<const PosteriorDraw> draws, const ForcingDesign& design,
                                const PredictOptions& options, const StreamKey& key);

// Reruns the filter for each draw at its own parameters on `obs` and
// replaces the final state with the one on the sampled trajectory, so one
// posterior can seed forecasts from later cutoffs. Draws whose filter dies
// are dropped; NumericalError when none survive.
std::vector<PosteriorDraw> refilter_final_states(std::span<const PosteriorDraw> draws, std::span<const Observation> obs,
                                                 const ForcingDesign& design, const FilterOptions& filter,
                                                 const StreamKey& key);

struct DecompositionOptions {
  std::size_t samples = 5000;
  // Days [start_day, end_day) of the forward simulation from the initials.
  std::int64_t start_day = 0;
  std::int64_t end_day = 0;
  SimConfig sim;
  Execution execution = Execution::kParallel;
};

struct DecompositionDay {
  std::int64_t day = 0;
  std::array<double, 3> alpha{};
  std::array<double, 3> beta_i{};
};

// Environmental versus person-to-person force of infection: resamples
// posterior draws with replacement, simulates each from the Poisson
// initials, and reports per-day quantiles of alpha(t) and beta * I_t.
std::vector<DecompositionDay> transmission_decomposition(std::span<const PosteriorDraw> draws,
                                                         const ForcingDesign& design,
                                                         const DecompositionOptions& options, const StreamKey& key);

struct ResidualOptions {
  std::size_t simulations = 5000;
  SimConfig sim;
  Execution execution = Execution::kParallel;
};

struct Residual {
  double t = 0.0;
  std::int64_t observed = 0;
  double expected = 0.0;
  double sd = 0.0;
  // Unset where the simulated sd is zero.
  std::optional<double> value;
};

// (y - E y) / sd(y) with both moments from forward simulations at fixed
// parameters, started from the Poisson initials at the first observation.
std::vector<Residual> standardized_residuals(std::span<const Observation> obs, const ModelParams& params,
                                             const DailyForcing& forcing, const ResidualOptions& options,
                                             const StreamKey& key);

// Componentwise median of the transformed draws mapped back to the
// natural scale (masked components come from `fixed`).
ModelParams posterior_median_params(std::span<const PosteriorDraw> draws, const ModelParams& fixed,
                                    const std::vector<bool>& fixed_mask = {});

}  // namespace sirs
