#include "sirs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

SimMethod parse_sim_method(std::string_view name) {
  if (name == "direct-exact" || name == "direct") return SimMethod::kDirect;
  if (name == "first-reaction-exact" || name == "first-reaction") return SimMethod::kFirstReaction;
  if (name == "tau-leap") return SimMethod::kTauLeap;
  throw ConfigError(fmt::format("unknown simulation method '{}'", name));
}

std::string_view to_string(SimMethod method) {
  switch (method) {
    case SimMethod::kDirect:
      return "direct-exact";
    case SimMethod::kFirstReaction:
      return "first-reaction-exact";
    case SimMethod::kTauLeap:
      return "tau-leap";
  }
  return "unknown";
}

void SimConfig::validate() const {
  if (!(tau_days > 0.0) || !std::isfinite(tau_days)) {
    throw ConfigError(fmt::format("tau must be positive, got {}", tau_days));
  }
  if (critical_size < 0) {
    throw ConfigError(fmt::format("critical size must be nonnegative, got {}", critical_size));
  }
  if (max_tau_halvings < 0) {
    throw ConfigError("max_tau_halvings must be nonnegative");
  }
}

void apply_event(HiddenState& state, Event event) {
  switch (event) {
    case Event::kInfection:
      --state.s;
      ++state.i;
      break;
    case Event::kRecovery:
      --state.i;
      break;
    case Event::kWaning:
      ++state.s;
      break;
  }
}

std::optional<Reaction> direct_step(const Hazards& h, Rng& rng) {
  const double total = h.total();
  if (!(total > 0.0)) return std::nullopt;
  const double wait = draw_exponential(rng, total);
  const double u = rng.uniform_open() * total;
  Event event = Event::kWaning;
  if (u < h.infection) {
    event = Event::kInfection;
  } else if (u < h.infection + h.recovery) {
    event = Event::kRecovery;
  } else if (!(h.waning > 0.0)) {
    // Rounding placed u past the last active channel.
    event = h.recovery > 0.0 ? Event::kRecovery : Event::kInfection;
  }
  return Reaction{event, wait};
}

std::optional<Reaction> first_reaction_step(const Hazards& h, Rng& rng) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double rates[3] = {h.infection, h.recovery, h.waning};
  const Event events[3] = {Event::kInfection, Event::kRecovery, Event::kWaning};
  std::optional<Reaction> best;
  double best_wait = kInf;
  for (int k = 0; k < 3; ++k) {
    if (!(rates[k] > 0.0)) continue;
    const double w = draw_exponential(rng, rates[k]);
    if (w < best_wait) {
      best_wait = w;
      best = Reaction{events[k], w};
    }
  }
  return best;
}

std::optional<Reaction> first_reaction_step(const HiddenState& state, double alpha_t, const ModelParams& params,
                                            Rng& rng) {
  return first_reaction_step(hazard_rates(state, alpha_t, params), rng);
}

EventCounts tau_leap_step(const HiddenState& state, double alpha_day, const ModelParams& params, double tau,
                          Rng& rng) {
  const Hazards h = hazard_rates(state, alpha_day, params);
  EventCounts k;
  k.infections = draw_poisson(rng, h.infection * tau);
  k.recoveries = draw_poisson(rng, h.recovery * tau);
  k.wanings = draw_poisson(rng, h.waning * tau);
  return k;
}

namespace {

// One exact event inside [t, seg_end). Returns false (and moves t to
// seg_end) when the sampled waiting time leaves the segment or the state
// is absorbing.
bool exact_event(HiddenState& state, double& t, double seg_end, double alpha, const ModelParams& params,
                 Rng& rng, SimMethod method) {
  const Hazards h = hazard_rates(state, alpha, params);
  const auto reaction = method == SimMethod::kFirstReaction ? first_reaction_step(h, rng) : direct_step(h, rng);
  if (!reaction || t + reaction->wait >= seg_end) {
    t = seg_end;
    return false;
  }
  t += reaction->wait;
  apply_event(state, reaction->event);
  return true;
}

double next_boundary(double t, double t_to) { return std::min(std::floor(t) + 1.0, t_to); }

void check_interval(double t_from, double t_to, const DailyForcing& forcing) {
  if (t_to < t_from) {
    throw std::invalid_argument(fmt::format("simulation interval is reversed: [{}, {})", t_from, t_to));
  }
  forcing.require_covers(t_from, t_to);
}

bool below_critical(const HiddenState& s, std::int64_t n_pop, std::int64_t critical) {
  return s.s < critical || s.i < critical || s.recovered(n_pop) < critical;
}

}  // namespace

HiddenState simulate_exact(HiddenState state, double t_from, double t_to, const DailyForcing& forcing,
                           const ModelParams& params, Rng& rng, SimMethod method) {
  check_interval(t_from, t_to, forcing);
  double t = t_from;
  while (t < t_to) {
    const double day_end = next_boundary(t, t_to);
    const double alpha = forcing.at(t);
    while (exact_event(state, t, day_end, alpha, params, rng, method)) {
    }
  }
  return state;
}

HiddenState simulate_tau_leap(HiddenState state, double t_from, double t_to, const DailyForcing& forcing,
                              const ModelParams& params, const SimConfig& config, Rng& rng) {
  check_interval(t_from, t_to, forcing);
  const std::int64_t n = params.n_pop;
  double t = t_from;
  while (t < t_to) {
    const double day_end = next_boundary(t, t_to);
    const double alpha = forcing.at(t);
    while (t < day_end) {
      if (below_critical(state, n, config.critical_size)) {
        exact_event(state, t, day_end, alpha, params, rng, SimMethod::kDirect);
        continue;
      }
      const double remaining = day_end - t;
      double tau = std::min(config.tau_days, remaining);
      bool leapt = false;
      for (int halving = 0; halving <= config.max_tau_halvings; ++halving) {
        const EventCounts k = tau_leap_step(state, alpha, params, tau, rng);
        const HiddenState next{state.s - k.infections + k.wanings, state.i + k.infections - k.recoveries};
        if (next.valid(n) && next.recovered(n) >= 0) {
          state = next;
          t = (tau == remaining) ? day_end : t + tau;
          leapt = true;
          break;
        }
        tau *= 0.5;
      }
      if (!leapt) {
        while (exact_event(state, t, day_end, alpha, params, rng, SimMethod::kDirect)) {
        }
      }
    }
  }
  return state;
}

HiddenState simulate(const HiddenState& state, double t_from, double t_to, const DailyForcing& forcing,
                     const ModelParams& params, const SimConfig& config, Rng& rng) {
  if (config.method == SimMethod::kTauLeap) {
    return simulate_tau_leap(state, t_from, t_to, forcing, params, config, rng);
  }
  return simulate_exact(state, t_from, t_to, forcing, params, rng, config.method);
}

}  // namespace sirs
