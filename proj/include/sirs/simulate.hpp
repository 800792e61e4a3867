#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "sirs/forcing.hpp"
#include "sirs/model.hpp"
#include "sirs/random.hpp"

namespace sirs {

enum class SimMethod { kDirect, kFirstReaction, kTauLeap };

SimMethod parse_sim_method(std::string_view name);
std::string_view to_string(SimMethod method);

struct SimConfig {
  SimMethod method = SimMethod::kTauLeap;
  double tau_days = 1.0;
  // Exact stepping is used while any compartment is below this size.
  std::int64_t critical_size = 10;
  // Rejected leaps are halved at most this many times before falling back
  // to exact stepping for the rest of the day.
  int max_tau_halvings = 30;

  void validate() const;
};

enum class Event { kInfection, kRecovery, kWaning };

struct Reaction {
  Event event;
  double wait;
};

struct EventCounts {
  std::int64_t infections = 0;
  std::int64_t recoveries = 0;
  std::int64_t wanings = 0;
};

void apply_event(HiddenState& state, Event event);

// Gillespie direct method: one Exp(h0) waiting time, then a categorical
// draw of the channel. nullopt when every hazard is zero.
std::optional<Reaction> direct_step(const Hazards& hazards, Rng& rng);

// First-reaction method: independent Exp(h_k) per channel, the minimum wins.
// nullopt when every hazard is zero (absorbing state).
std::optional<Reaction> first_reaction_step(const HiddenState& state, double alpha_t, const ModelParams& params,
                                            Rng& rng);
std::optional<Reaction> first_reaction_step(const Hazards& hazards, Rng& rng);

// Independent Poisson(h_j * tau) counts from the pre-leap state.
EventCounts tau_leap_step(const HiddenState& state, double alpha_day, const ModelParams& params, double tau,
                          Rng& rng);

// Exact simulation from t_from to t_to under the daily step forcing. A
// waiting time that crosses a day boundary is discarded and the clock
// restarts at the boundary with the next day's rates.
HiddenState simulate_exact(HiddenState state, double t_from, double t_to, const DailyForcing& forcing,
                           const ModelParams& params, Rng& rng, SimMethod method = SimMethod::kDirect);

// Modified tau-leaping with critical-size exact fallback and leap halving.
HiddenState simulate_tau_leap(HiddenState state, double t_from, double t_to, const DailyForcing& forcing,
                              const ModelParams& params, const SimConfig& config, Rng& rng);

// Dispatches on config.method.
HiddenState simulate(const HiddenState& state, double t_from, double t_to, const DailyForcing& forcing,
                     const ModelParams& params, const SimConfig& config, Rng& rng);

}  // namespace sirs
