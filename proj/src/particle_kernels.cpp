#include <cstddef>

#include "sirs/particle_filter.hpp"

namespace sirs::kernels {

namespace {

inline void initialize_one(std::size_t k, std::span<HiddenState> states, std::span<double> log_weights,
                           const Observation& y0, const ModelParams& params, const StreamKey& key) {
  Rng rng = key.rng({tag(Purpose::kInitial), k});
  states[k] = sample_initial_state(params.phi_s, params.phi_i, params.n_pop, rng);
  log_weights[k] = emission_log_pmf(y0.y, states[k].i, params.rho);
}

inline void propagate_one(std::size_t k, std::span<HiddenState> states, std::span<double> log_weights,
                          double t_from, const Observation& obs, const DailyForcing& forcing,
                          const ModelParams& params, const SimConfig& sim, const StreamKey& key,
                          std::uint64_t step) {
  Rng rng = key.rng({tag(Purpose::kPropagate), step, k});
  states[k] = simulate(states[k], t_from, obs.t, forcing, params, sim, rng);
  log_weights[k] = emission_log_pmf(obs.y, states[k].i, params.rho);
}

}  // namespace

void initialize_serial(std::span<HiddenState> states, std::span<double> log_weights, const Observation& y0,
                       const ModelParams& params, const StreamKey& key) {
  for (std::size_t k = 0; k < states.size(); ++k) {
    initialize_one(k, states, log_weights, y0, params, key);
  }
}

void initialize_parallel(std::span<HiddenState> states, std::span<double> log_weights, const Observation& y0,
                         const ModelParams& params, const StreamKey& key) {
  const auto n = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    initialize_one(static_cast<std::size_t>(k), states, log_weights, y0, params, key);
  }
}

void propagate_serial(std::span<HiddenState> states, std::span<double> log_weights, double t_from,
                      const Observation& obs, const DailyForcing& forcing, const ModelParams& params,
                      const SimConfig& sim, const StreamKey& key, std::uint64_t step) {
  for (std::size_t k = 0; k < states.size(); ++k) {
    propagate_one(k, states, log_weights, t_from, obs, forcing, params, sim, key, step);
  }
}

void propagate_parallel(std::span<HiddenState> states, std::span<double> log_weights, double t_from,
                        const Observation& obs, const DailyForcing& forcing, const ModelParams& params,
                        const SimConfig& sim, const StreamKey& key, std::uint64_t step) {
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  // Per-particle cost varies with the number of events, hence dynamic.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    propagate_one(static_cast<std::size_t>(k), states, log_weights, t_from, obs, forcing, params, sim, key, step);
  }
}

}  // namespace sirs::kernels
