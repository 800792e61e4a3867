#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sirs/forcing.hpp"
#include "sirs/model.hpp"
#include "sirs/observation.hpp"
#include "sirs/random.hpp"
#include "sirs/simulate.hpp"

namespace sirs {

enum class Resampling { kMultinomial, kSystematic };

// Where the per-particle kernels run. Both produce bit-identical output for
// the same stream key; kSerial is the reference path.
enum class Execution { kSerial, kParallel };

struct FilterOptions {
  std::size_t particles = 100;
  SimConfig sim;
  Resampling resampling = Resampling::kMultinomial;
  Execution execution = Execution::kParallel;
  bool store_trajectory = true;
  // When set, every particle starts here instead of from the Poisson initials.
  std::optional<HiddenState> initial_state;
};

// K weighted particles at the current observation time plus the history
// needed to trace one trajectory back through the resampling ancestry.
struct ParticleSystem {
  std::vector<HiddenState> states;
  std::vector<double> log_weights;
  // history[i][k]: state of particle k at observation i (before resampling).
  std::vector<std::vector<HiddenState>> history;
  // ancestry[i][k]: index into history[i - 1] of the parent of particle k
  // at observation i; ancestry[0] is empty.
  std::vector<std::vector<std::uint32_t>> ancestry;
  double log_lik_running = 0.0;
};

struct FilterResult {
  double log_lik_hat = 0.0;
  // Hidden state at each observation time; empty on particle death.
  std::vector<HiddenState> trajectory;
  std::vector<HiddenState> final_states;
  std::vector<double> final_log_weights;

  bool alive() const;
};

// Bootstrap particle filter. Particles start from the Poisson initials and
// are weighted by the first observation; every later step resamples,
// propagates with the simulator and reweights. Returns log_lik_hat = -inf
// (not an exception) when every particle is incompatible with the data.
FilterResult run_filter(std::span<const Observation> obs, const DailyForcing& forcing, const ModelParams& params,
                        const FilterOptions& options, const StreamKey& key);

// Indices drawn i.i.d. from the normalized weights. Throws NumericalError
// if no weight is finite.
std::vector<std::uint32_t> resample_multinomial(std::span<const double> log_weights, std::size_t count, Rng& rng);
std::vector<std::uint32_t> resample_systematic(std::span<const double> log_weights, std::size_t count, Rng& rng);

// log((1/n) sum exp(x)); -inf when every entry is -inf.
double log_mean_exp(std::span<const double> x);

namespace kernels {

// Draw initial particles and weight them by the first observation.
void initialize_serial(std::span<HiddenState> states, std::span<double> log_weights, const Observation& y0,
                       const ModelParams& params, const StreamKey& key);
void initialize_parallel(std::span<HiddenState> states, std::span<double> log_weights, const Observation& y0,
                         const ModelParams& params, const StreamKey& key);

// Advance every particle from t_from to obs.t and weight by obs.y.
void propagate_serial(std::span<HiddenState> states, std::span<double> log_weights, double t_from,
                      const Observation& obs, const DailyForcing& forcing, const ModelParams& params,
                      const SimConfig& sim, const StreamKey& key, std::uint64_t step);
void propagate_parallel(std::span<HiddenState> states, std::span<double> log_weights, double t_from,
                        const Observation& obs, const DailyForcing& forcing, const ModelParams& params,
                        const SimConfig& sim, const StreamKey& key, std::uint64_t step);

}  // namespace kernels

}  // namespace sirs
