#include "sirs/observation.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

void validate_observations(std::span<const Observation> obs) {
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (obs[k].y < 0) {
      throw DataError(fmt::format("observation {} (day {}) has a negative count", k, obs[k].t));
    }
    if (!std::isfinite(obs[k].t)) {
      throw DataError(fmt::format("observation {} has a non-finite time", k));
    }
    if (k > 0 && !(obs[k].t > obs[k - 1].t)) {
      throw DataError(fmt::format("observation times must increase strictly (day {} follows day {})", obs[k].t,
                                  obs[k - 1].t));
    }
  }
}

double emission_log_pmf(std::int64_t y, std::int64_t i_count, double rho) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (y < 0 || y > i_count) return kNegInf;
  const auto yd = static_cast<double>(y);
  const auto nd = static_cast<double>(i_count);
  const double log_choose = std::lgamma(nd + 1.0) - std::lgamma(yd + 1.0) - std::lgamma(nd - yd + 1.0);
  double out = log_choose;
  if (y > 0) {
    if (rho <= 0.0) return kNegInf;
    out += yd * std::log(rho);
  }
  if (i_count > y) {
    if (rho >= 1.0) return kNegInf;
    out += (nd - yd) * std::log1p(-rho);
  }
  return out;
}

HiddenState sample_initial_state(double phi_s, double phi_i, std::int64_t n_pop, Rng& rng) {
  if (phi_s + phi_i > static_cast<double>(n_pop)) {
    throw ConfigError(fmt::format("initial means phi_s + phi_i = {} exceed the population size {}", phi_s + phi_i,
                                  n_pop));
  }
  while (true) {
    HiddenState x{draw_poisson(rng, phi_s), draw_poisson(rng, phi_i)};
    if (x.s + x.i <= n_pop) return x;
  }
}

std::int64_t sample_observation(std::int64_t i_count, double rho, Rng& rng) {
  return draw_binomial(rng, i_count, rho);
}

}  // namespace sirs
