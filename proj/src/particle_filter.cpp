#include "sirs/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalized cumulative weights; the last entry is forced to exactly 1.
std::vector<double> cumulative_weights(std::span<const double> log_weights) {
  double max_lw = kNegInf;
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw)) {
    throw NumericalError("cannot resample: every particle weight is zero");
  }
  std::vector<double> cdf(log_weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    acc += std::exp(log_weights[k] - max_lw);
    cdf[k] = acc;
  }
  for (double& c : cdf) c /= acc;
  // Indices past the last positive weight must never be selected.
  std::size_t last = log_weights.size();
  while (last > 0 && log_weights[last - 1] == kNegInf) --last;
  for (std::size_t k = last - 1; k < cdf.size(); ++k) cdf[k] = 1.0;
  return cdf;
}

std::uint32_t lookup(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf.begin());
  return static_cast<std::uint32_t>(std::min(idx, cdf.size() - 1));
}

}  // namespace

bool FilterResult::alive() const { return std::isfinite(log_lik_hat); }

double log_mean_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  double max_x = kNegInf;
  for (double v : x) max_x = std::max(max_x, v);
  if (!std::isfinite(max_x)) return kNegInf;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - max_x);
  return max_x + std::log(acc / static_cast<double>(x.size()));
}

std::vector<std::uint32_t> resample_multinomial(std::span<const double> log_weights, std::size_t count, Rng& rng) {
  const auto cdf = cumulative_weights(log_weights);
  std::vector<std::uint32_t> idx(count);
  for (auto& j : idx) j = lookup(cdf, rng.uniform_open());
  return idx;
}

std::vector<std::uint32_t> resample_systematic(std::span<const double> log_weights, std::size_t count, Rng& rng) {
  const auto cdf = cumulative_weights(log_weights);
  std::vector<std::uint32_t> idx(count);
  const double u0 = rng.uniform_open() / static_cast<double>(count);
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double u = u0 + static_cast<double>(k) / static_cast<double>(count);
    while (j + 1 < cdf.size() && cdf[j] <= u) ++j;
    idx[k] = static_cast<std::uint32_t>(j);
  }
  return idx;
}

FilterResult run_filter(std::span<const Observation> obs, const DailyForcing& forcing, const ModelParams& params,
                        const FilterOptions& options, const StreamKey& key) {
  if (obs.empty()) {
    throw DataError("the particle filter needs at least one observation");
  }
  if (options.particles == 0) {
    throw ConfigError("the particle filter needs at least one particle");
  }
  if (!options.initial_state && params.phi_s + params.phi_i > static_cast<double>(params.n_pop)) {
    throw ConfigError(fmt::format("initial means phi_s + phi_i = {} exceed the population size {}",
                                  params.phi_s + params.phi_i, params.n_pop));
  }
  forcing.require_covers(obs.front().t, obs.back().t);

  const std::size_t n_particles = options.particles;
  const bool parallel = options.execution == Execution::kParallel;

  ParticleSystem ps;
  ps.states.resize(n_particles);
  ps.log_weights.resize(n_particles);
  if (options.store_trajectory) {
    ps.history.reserve(obs.size());
    ps.ancestry.reserve(obs.size());
  }

  if (options.initial_state) {
    if (!options.initial_state->valid(params.n_pop)) {
      throw ConfigError("the fixed initial state is outside the population");
    }
    std::fill(ps.states.begin(), ps.states.end(), *options.initial_state);
    std::fill(ps.log_weights.begin(), ps.log_weights.end(),
              emission_log_pmf(obs[0].y, options.initial_state->i, params.rho));
  } else if (parallel) {
    kernels::initialize_parallel(ps.states, ps.log_weights, obs[0], params, key);
  } else {
    kernels::initialize_serial(ps.states, ps.log_weights, obs[0], params, key);
  }
  ps.log_lik_running = log_mean_exp(ps.log_weights);
  if (options.store_trajectory) {
    ps.history.push_back(ps.states);
    ps.ancestry.emplace_back();
  }

  FilterResult result;
  auto dead = [&] {
    result.log_lik_hat = kNegInf;
    result.final_states = ps.states;
    result.final_log_weights = ps.log_weights;
    return result;
  };
  if (!std::isfinite(ps.log_lik_running)) return dead();

  std::vector<HiddenState> resampled(n_particles);
  for (std::size_t i = 1; i < obs.size(); ++i) {
    Rng rs_rng = key.rng({tag(Purpose::kResample), i});
    const auto parents = options.resampling == Resampling::kSystematic
                             ? resample_systematic(ps.log_weights, n_particles, rs_rng)
                             : resample_multinomial(ps.log_weights, n_particles, rs_rng);
    for (std::size_t k = 0; k < n_particles; ++k) resampled[k] = ps.states[parents[k]];
    ps.states.swap(resampled);

    if (parallel) {
      kernels::propagate_parallel(ps.states, ps.log_weights, obs[i - 1].t, obs[i], forcing, params, options.sim,
                                  key, i);
    } else {
      kernels::propagate_serial(ps.states, ps.log_weights, obs[i - 1].t, obs[i], forcing, params, options.sim, key,
                                i);
    }
    if (options.store_trajectory) {
      ps.history.push_back(ps.states);
      ps.ancestry.push_back(parents);
    }
    ps.log_lik_running += log_mean_exp(ps.log_weights);
    if (!std::isfinite(ps.log_lik_running)) return dead();
  }

  result.log_lik_hat = ps.log_lik_running;
  if (options.store_trajectory) {
    Rng traj_rng = key.rng({tag(Purpose::kTrajectory)});
    std::uint32_t k = resample_multinomial(ps.log_weights, 1, traj_rng)[0];
    result.trajectory.resize(obs.size());
    for (std::size_t i = obs.size(); i-- > 0;) {
      result.trajectory[i] = ps.history[i][k];
      if (i > 0) k = ps.ancestry[i][k];
    }
  }
  result.final_states = std::move(ps.states);
  result.final_log_weights = std::move(ps.log_weights);
  return result;
}

}  // namespace sirs
