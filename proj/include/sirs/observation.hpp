#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sirs/model.hpp"
#include "sirs/random.hpp"

namespace sirs {

// Reported case count at a (possibly non-integer) day.
struct Observation {
  double t = 0.0;
  std::int64_t y = 0;
};

// Throws DataError unless times are strictly increasing and counts nonnegative.
void validate_observations(std::span<const Observation> obs);

// log Binomial(y | I, rho) with 0 * log 0 = 0; -inf when y > I.
double emission_log_pmf(std::int64_t y, std::int64_t i_count, double rho);

// S ~ Poisson(phi_s), I ~ Poisson(phi_i); pairs with S + I > N are redrawn.
// Throws ConfigError when phi_s + phi_i > N.
HiddenState sample_initial_state(double phi_s, double phi_i, std::int64_t n_pop, Rng& rng);

std::int64_t sample_observation(std::int64_t i_count, double rho, Rng& rng);

}  // namespace sirs
