#include "sirs/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include <fmt/format.h>

#include "sirs/diagnostics.hpp"
#include "sirs/errors.hpp"

namespace sirs {

namespace {

// Runs body(k) for k in [0, n), serially or with OpenMP. The first
// exception thrown by any iteration is rethrown after the loop.
template <class Body>
void for_each_index(std::size_t n, Execution execution, Body body) {
  if (execution == Execution::kSerial) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::exception_ptr failure;
  std::once_flag once;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
      std::call_once(once, [&] { failure = std::current_exception(); });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::array<double, 3> central(std::span<const double> values) {
  const auto q = quantiles(values, kCentralLevels);
  return {q[0], q[1], q[2]};
}

const ModelParams& natural_of(const PosteriorDraw& d, std::size_t index) {
  if (!d.natural) {
    throw ConfigError(fmt::format("posterior draw {} has no valid natural-scale parameters", index));
  }
  return *d.natural;
}

void require_design_covers(const ForcingDesign& design, double t_from, double t_to, const PredictOptions* opt) {
  if (opt && opt->forcing_known_until && t_to > *opt->forcing_known_until) {
    const std::string lag = opt->lag_days ? fmt::format(" (cutoff {} plus a covariate lag of {} days)", opt->cutoff,
                                                        *opt->lag_days)
                                          : std::string();
    throw DataError(fmt::format("prediction horizon ends on day {} but forcing is known only through day {}{}", t_to,
                                *opt->forcing_known_until, lag));
  }
  if (t_to <= t_from) return;
  const auto first = static_cast<std::int64_t>(std::floor(t_from));
  const auto last = static_cast<std::int64_t>(std::ceil(t_to));
  if (first < design.start_day() || last > design.end_day()) {
    throw DataError(fmt::format("forcing covers days [{}, {}) but [{}, {}) is needed", design.start_day(),
                                design.end_day(), first, last));
  }
}

}  // namespace

std::vector<std::size_t> thin_indices(std::size_t total, std::size_t count) {
  std::vector<std::size_t> idx;
  if (total <= count) {
    for (std::size_t k = 0; k < total; ++k) idx.push_back(k);
    return idx;
  }
  for (std::size_t j = 0; j < count; ++j) idx.push_back(j * total / count);
  return idx;
}

PredictionRun posterior_predict(std::span<const PosteriorDraw> draws, const ForcingDesign& design,
                                const PredictOptions& options, const StreamKey& key) {
  PredictionRun run;
  run.cutoff = options.cutoff;
  run.horizon_end = options.horizon_end;
  run.replicates_per_draw = options.replicates_per_draw;
  if (options.horizon_end < options.cutoff) {
    throw ConfigError(fmt::format("prediction horizon ({}, {}] is reversed", options.cutoff, options.horizon_end));
  }
  if (options.horizon_end == options.cutoff) return run;
  if (options.replicates_per_draw == 0 || options.draws_used == 0) {
    throw ConfigError("prediction needs at least one draw and one replicate per draw");
  }
  if (draws.empty()) throw DataError("prediction needs at least one posterior draw");
  for (std::size_t j = 0; j < options.observation_times.size(); ++j) {
    const double t = options.observation_times[j];
    if (!(t > options.cutoff && t <= options.horizon_end)) {
      throw ConfigError(fmt::format("prediction time {} lies outside the horizon ({}, {}]", t, options.cutoff,
                                    options.horizon_end));
    }
    if (j > 0 && !(t > options.observation_times[j - 1])) {
      throw ConfigError("prediction times must increase strictly");
    }
  }
  require_design_covers(design, options.cutoff, options.horizon_end, &options);

  const std::vector<std::size_t> used = thin_indices(draws.size(), options.draws_used);
  run.draws_used = used.size();
  for (std::size_t u : used) {
    const ModelParams& p = natural_of(draws[u], u);
    if (!draws[u].final_state.valid(p.n_pop)) {
      throw DataError(fmt::format("posterior draw {} has an invalid final state (S_T={}, I_T={})", u,
                                  draws[u].final_state.s, draws[u].final_state.i));
    }
  }

  // Times at which the state is recorded: integer days of [cutoff, end]
  // merged with the observation times.
  struct GridPoint {
    double t;
    int hidden = -1;  // index into run.hidden
    int obs = -1;     // index into run.times
  };
  std::vector<GridPoint> grid;
  for (auto d = static_cast<std::int64_t>(std::ceil(options.cutoff));
       static_cast<double>(d) <= options.horizon_end; ++d) {
    grid.push_back({static_cast<double>(d), static_cast<int>(grid.size()), -1});
    run.hidden.push_back({d, {}, {}});
  }
  for (std::size_t j = 0; j < options.observation_times.size(); ++j) {
    const double t = options.observation_times[j];
    auto it = std::find_if(grid.begin(), grid.end(), [t](const GridPoint& g) { return g.t == t; });
    if (it != grid.end()) {
      it->obs = static_cast<int>(j);
    } else {
      grid.push_back({t, -1, static_cast<int>(j)});
    }
  }
  std::sort(grid.begin(), grid.end(), [](const GridPoint& a, const GridPoint& b) { return a.t < b.t; });
  run.times = options.observation_times;

  const std::size_t n_paths = used.size() * options.replicates_per_draw;
  const std::size_t n_obs = run.times.size(), n_hidden = run.hidden.size();
  std::vector<std::int64_t> counts(n_paths * n_obs);
  std::vector<double> s_frac(n_paths * n_hidden), i_frac(n_paths * n_hidden);

  for_each_index(used.size(), options.execution, [&](std::size_t u) {
    const PosteriorDraw& draw = draws[used[u]];
    const ModelParams& p = *draw.natural;
    const DailyForcing forcing = design.evaluate(p.alpha);
    const auto n = static_cast<double>(p.n_pop);
    for (std::size_t r = 0; r < options.replicates_per_draw; ++r) {
      const std::size_t path = u * options.replicates_per_draw + r;
      Rng rng = key.rng({tag(Purpose::kPredict), u, r});
      HiddenState x = draw.final_state;
      double t = options.cutoff;
      for (const GridPoint& g : grid) {
        x = simulate(x, t, g.t, forcing, p, options.sim, rng);
        t = g.t;
        if (g.hidden >= 0) {
          s_frac[path * n_hidden + static_cast<std::size_t>(g.hidden)] = static_cast<double>(x.s) / n;
          i_frac[path * n_hidden + static_cast<std::size_t>(g.hidden)] = static_cast<double>(x.i) / n;
        }
        if (g.obs >= 0) {
          counts[path * n_obs + static_cast<std::size_t>(g.obs)] = sample_observation(x.i, p.rho, rng);
        }
      }
    }
  });

  std::vector<double> column(n_paths);
  for (std::size_t h = 0; h < n_hidden; ++h) {
    for (std::size_t k = 0; k < n_paths; ++k) column[k] = s_frac[k * n_hidden + h];
    run.hidden[h].s_fraction = central(column);
    for (std::size_t k = 0; k < n_paths; ++k) column[k] = i_frac[k * n_hidden + h];
    run.hidden[h].i_fraction = central(column);
  }
  const double w = 1.0 / static_cast<double>(n_paths);
  for (std::size_t j = 0; j < n_obs; ++j) {
    std::map<std::int64_t, double> pmf;
    for (std::size_t k = 0; k < n_paths; ++k) {
      const std::int64_t y = counts[k * n_obs + j];
      pmf[y] += w;
      column[k] = static_cast<double>(y);
    }
    run.counts.push_back(std::move(pmf));
    run.count_quantiles.push_back(central(column));
    if (options.per_draw_means) {
      std::vector<double> means(used.size(), 0.0);
      for (std::size_t u = 0; u < used.size(); ++u) {
        for (std::size_t r = 0; r < options.replicates_per_draw; ++r) {
          means[u] += static_cast<double>(counts[(u * options.replicates_per_draw + r) * n_obs + j]);
        }
        means[u] /= static_cast<double>(options.replicates_per_draw);
      }
      run.mean_count_quantiles.push_back(central(means));
    }
  }
  return run;
}

std::vector<DecompositionDay> transmission_decomposition(std::span<const PosteriorDraw> draws,
                                                         const ForcingDesign& design,
                                                         const DecompositionOptions& options, const StreamKey& key) {
  if (options.end_day <= options.start_day) return {};
  if (draws.empty()) throw DataError("the decomposition needs at least one posterior draw");
  if (options.samples == 0) throw ConfigError("the decomposition needs at least one sample");
  require_design_covers(design, static_cast<double>(options.start_day), static_cast<double>(options.end_day),
                        nullptr);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const ModelParams& p = natural_of(draws[k], k);
    if (p.phi_s + p.phi_i > static_cast<double>(p.n_pop)) {
      throw ConfigError(fmt::format("posterior draw {} has phi_s + phi_i above the population size", k));
    }
  }

  Rng pick = key.rng({tag(Purpose::kDecomposition)});
  std::vector<std::size_t> chosen(options.samples);
  for (auto& c : chosen) {
    c = std::min(static_cast<std::size_t>(pick.uniform_open() * static_cast<double>(draws.size())), draws.size() - 1);
  }

  const auto days = static_cast<std::size_t>(options.end_day - options.start_day);
  std::vector<double> alpha(options.samples * days), beta_i(options.samples * days);
  for_each_index(options.samples, options.execution, [&](std::size_t s) {
    const ModelParams& p = *draws[chosen[s]].natural;
    const DailyForcing forcing = design.evaluate(p.alpha);
    Rng rng = key.rng({tag(Purpose::kDecomposition), s});
    HiddenState x = sample_initial_state(p.phi_s, p.phi_i, p.n_pop, rng);
    for (std::size_t k = 0; k < days; ++k) {
      const std::int64_t day = options.start_day + static_cast<std::int64_t>(k);
      alpha[s * days + k] = forcing.at_day(day);
      beta_i[s * days + k] = p.beta * static_cast<double>(x.i);
      if (k + 1 < days) {
        x = simulate(x, static_cast<double>(day), static_cast<double>(day + 1), forcing, p, options.sim, rng);
      }
    }
  });

  std::vector<DecompositionDay> out(days);
  std::vector<double> column(options.samples);
  for (std::size_t k = 0; k < days; ++k) {
    out[k].day = options.start_day + static_cast<std::int64_t>(k);
    for (std::size_t s = 0; s < options.samples; ++s) column[s] = alpha[s * days + k];
    out[k].alpha = central(column);
    for (std::size_t s = 0; s < options.samples; ++s) column[s] = beta_i[s * days + k];
    out[k].beta_i = central(column);
  }
  return out;
}

std::vector<Residual> standardized_residuals(std::span<const Observation> obs, const ModelParams& params,
                                             const DailyForcing& forcing, const ResidualOptions& options,
                                             const StreamKey& key) {
  if (obs.empty()) throw DataError("residuals need at least one observation");
  if (options.simulations < 2) throw ConfigError("residuals need at least two forward simulations");
  validate_observations(obs);
  forcing.require_covers(obs.front().t, obs.back().t);
  if (params.phi_s + params.phi_i > static_cast<double>(params.n_pop)) {
    throw ConfigError("phi_s + phi_i exceeds the population size");
  }

  const std::size_t n_obs = obs.size(), n_sims = options.simulations;
  std::vector<double> ys(n_sims * n_obs);
  for_each_index(n_sims, options.execution, [&](std::size_t s) {
    Rng rng = key.rng({tag(Purpose::kResidual), s});
    HiddenState x = sample_initial_state(params.phi_s, params.phi_i, params.n_pop, rng);
    for (std::size_t j = 0; j < n_obs; ++j) {
      if (j > 0) x = simulate(x, obs[j - 1].t, obs[j].t, forcing, params, options.sim, rng);
      ys[s * n_obs + j] = static_cast<double>(sample_observation(x.i, params.rho, rng));
    }
  });

  std::vector<Residual> out(n_obs);
  for (std::size_t j = 0; j < n_obs; ++j) {
    double mean = 0.0;
    for (std::size_t s = 0; s < n_sims; ++s) mean += ys[s * n_obs + j];
    mean /= static_cast<double>(n_sims);
    double ss = 0.0;
    for (std::size_t s = 0; s < n_sims; ++s) ss += (ys[s * n_obs + j] - mean) * (ys[s * n_obs + j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n_sims - 1));
    Residual& r = out[j];
    r.t = obs[j].t;
    r.observed = obs[j].y;
    r.expected = mean;
    r.sd = sd;
    if (sd > 0.0) r.value = (static_cast<double>(obs[j].y) - mean) / sd;
  }
  return out;
}

std::vector<PosteriorDraw> refilter_final_states(std::span<const PosteriorDraw> draws, std::span<const Observation> obs,
                                                 const ForcingDesign& design, const FilterOptions& filter,
                                                 const StreamKey& key) {
  FilterOptions opt = filter;
  opt.store_trajectory = true;
  std::vector<PosteriorDraw> out;
  out.reserve(draws.size());
  for (std::size_t u = 0; u < draws.size(); ++u) {
    if (!draws[u].natural) throw ConfigError("re-filtering needs natural parameters on every draw");
    const ModelParams& p = *draws[u].natural;
    const FilterResult fr = run_filter(obs, design.evaluate(p.alpha), p, opt, key.child({tag(Purpose::kFilter), u}));
    if (!fr.alive() || fr.trajectory.empty()) continue;
    PosteriorDraw d = draws[u];
    d.final_state = fr.trajectory.back();
    d.log_lik_hat = fr.log_lik_hat;
    d.trajectory.clear();
    out.push_back(std::move(d));
  }
  if (out.empty()) throw NumericalError("every draw's filter died while re-filtering to the cutoff");
  return out;
}

ModelParams posterior_median_params(std::span<const PosteriorDraw> draws, const ModelParams& fixed,
                                    const std::vector<bool>& fixed_mask) {
  if (draws.empty()) throw DataError("posterior medians need at least one draw");
  const std::size_t dim = draws.front().theta.size();
  std::vector<double> med(dim), column(draws.size());
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t k = 0; k < draws.size(); ++k) column[k] = draws[k].theta[j];
    med[j] = median(column);
  }
  return from_transformed(TransformedParams(std::move(med), draws.front().theta.n_alpha()), fixed, fixed_mask);
}

}  // namespace sirs
