#include "sirs/pipelines.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

#include "sirs/covariates.hpp"
#include "sirs/diagnostics.hpp"
#include "sirs/errors.hpp"
#include "sirs/forecast.hpp"
#include "sirs/io.hpp"
#include "sirs/quasi_poisson.hpp"
#include "sirs/simulate.hpp"

namespace sirs {

namespace fs = std::filesystem;

namespace {

// Root stream namespaces, one per pipeline.
constexpr std::uint64_t kSimulateNs = 0x73696d75;
constexpr std::uint64_t kFitNs = 0x66697420;
constexpr std::uint64_t kPredictNs = 0x70726564;
constexpr std::uint64_t kDiagnoseNs = 0x64696167;

const fs::path& require_input(const std::optional<fs::path>& p, std::string_view flag, std::string_view pipeline) {
  if (!p) throw ConfigError(fmt::format("{} needs {}", pipeline, flag));
  if (!fs::exists(*p)) throw ConfigError(fmt::format("{} {}: file does not exist", flag, p->string()));
  return *p;
}

void check_optional_input(const std::optional<fs::path>& p, std::string_view flag) {
  if (p && !fs::exists(*p)) throw ConfigError(fmt::format("{} {}: file does not exist", flag, p->string()));
}

std::string day_label(double day) { return io::format_number(day); }

std::vector<Observation> up_to(const std::vector<Observation>& obs, double cutoff) {
  std::vector<Observation> out;
  for (const auto& o : obs) {
    if (o.t <= cutoff) out.push_back(o);
  }
  return out;
}

class Outputs {
 public:
  Outputs(fs::path dir, RunReport& report) : dir_(std::move(dir)), report_(report) {}
  fs::path operator()(const std::string& name) {
    fs::path p = dir_ / name;
    report_.files.push_back(p);
    return p;
  }

 private:
  fs::path dir_;
  RunReport& report_;
};

void run_simulate(const RunConfig& cfg, const ForcingSetup& setup, Outputs& out) {
  const DailyForcing forcing = setup.design.evaluate(cfg.model.alpha);
  const double t0 = cfg.simulate.obs_start.value_or(static_cast<double>(cfg.forcing.start_day));
  const double t_end = cfg.simulate.obs_end.value_or(static_cast<double>(cfg.forcing.end_day - 1));
  if (t0 < static_cast<double>(forcing.start_day()) || t_end >= static_cast<double>(forcing.end_day()) ||
      t_end < t0) {
    throw ConfigError(fmt::format("[simulate] observations [{}, {}] must lie inside the forcing window [{}, {})",
                                  t0, t_end, forcing.start_day(), forcing.end_day()));
  }
  std::vector<double> obs_times;
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * cfg.simulate.obs_interval;
    if (t > t_end) break;
    obs_times.push_back(t);
  }
  std::vector<double> grid = obs_times;
  for (auto d = static_cast<std::int64_t>(std::ceil(t0)); static_cast<double>(d) <= t_end; ++d) {
    grid.push_back(static_cast<double>(d));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const StreamKey key{cfg.seed, kSimulateNs};
  const ModelParams& p = cfg.model;
  if (p.phi_s + p.phi_i > static_cast<double>(p.n_pop)) {
    throw ConfigError("[model] phi_s + phi_i exceeds the population size");
  }
  Rng init_rng = key.rng({tag(Purpose::kInitial)});
  Rng path_rng = key.rng({tag(Purpose::kPropagate)});
  Rng obs_rng = key.rng({tag(Purpose::kObservation)});
  HiddenState x = sample_initial_state(p.phi_s, p.phi_i, p.n_pop, init_rng);

  std::vector<io::StatePoint> path;
  std::vector<Observation> obs;
  std::size_t next_obs = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (g > 0) x = simulate(x, grid[g - 1], grid[g], forcing, p, cfg.sim, path_rng);
    if (grid[g] == std::floor(grid[g])) path.push_back({grid[g], x});
    if (next_obs < obs_times.size() && obs_times[next_obs] == grid[g]) {
      obs.push_back({grid[g], sample_observation(x.i, p.rho, obs_rng)});
      ++next_obs;
    }
  }
  io::write_cases(out("cases.csv"), obs);
  io::write_hidden_path(out("hidden.csv"), path, p.n_pop);
  io::write_forcing(out("forcing.csv"), forcing);
}

void write_covariance(const fs::path& path, const PipelineResult& result, const RunConfig& cfg) {
  const auto names = transformed_names(cfg.model.alpha.size());
  const auto active = cfg.prior.active_indices();
  std::vector<std::string> header{"parameter"};
  for (auto j : active) header.push_back(names[j]);
  io::CsvWriter w(header);
  for (Eigen::Index r = 0; r < result.final_covariance.rows(); ++r) {
    std::vector<std::string> row{names[active[static_cast<std::size_t>(r)]]};
    for (Eigen::Index c = 0; c < result.final_covariance.cols(); ++c) {
      row.push_back(io::format_number(result.final_covariance(r, c)));
    }
    w.row(row);
  }
  w.save(path);
}

void run_fit(const RunConfig& cfg, const ForcingSetup& setup, Outputs& out) {
  std::vector<Observation> obs = io::read_cases(require_input(cfg.inputs.data, "--data", "fit"));
  if (cfg.inputs.cutoff_day) {
    obs = up_to(obs, *cfg.inputs.cutoff_day);
    if (obs.empty()) throw DataError(fmt::format("no observations on or before day {}", *cfg.inputs.cutoff_day));
  }
  const PipelineResult result = fit_posterior(cfg, obs, setup.design, StreamKey{cfg.seed, kFitNs});
  io::write_posterior(out("posterior.csv"), result.draws);
  io::write_phase_stats(out("fit_phases.csv"), result);
  write_covariance(out("proposal_covariance.csv"), result, cfg);
}

std::vector<double> horizon_times(const RunConfig& cfg, const std::vector<Observation>* data, double cutoff,
                                  double horizon_end) {
  std::vector<double> times;
  if (data) {
    for (const auto& o : *data) {
      if (o.t > cutoff && o.t <= horizon_end) times.push_back(o.t);
    }
  }
  if (times.empty()) {
    for (std::size_t k = 1;; ++k) {
      const double t = cutoff + static_cast<double>(k) * cfg.simulate.obs_interval;
      if (t > horizon_end) break;
      times.push_back(t);
    }
  }
  return times;
}

void run_predict(const RunConfig& cfg, const ForcingSetup& setup, Outputs& out, const LogFn& log) {
  check_optional_input(cfg.inputs.data, "--data");
  std::optional<std::vector<Observation>> data;
  if (cfg.inputs.data) data = io::read_cases(*cfg.inputs.data);

  std::vector<double> cutoffs;
  if (cfg.inputs.cutoff_day) {
    cutoffs = {*cfg.inputs.cutoff_day};
  } else {
    cutoffs = cfg.predict.cutoffs;
  }
  if (cutoffs.empty()) throw ConfigError("predict needs --cutoff-day or [predict] cutoffs");

  std::optional<std::vector<PosteriorDraw>> given;
  if (cfg.inputs.posterior) {
    if (cutoffs.size() != 1 && !cfg.predict.refilter) {
      throw ConfigError("one posterior serves several cutoffs only with [predict] refilter = true");
    }
    if (cfg.predict.refilter && !data) throw ConfigError("[predict] refilter needs --data");
    given = io::read_posterior(require_input(cfg.inputs.posterior, "--posterior", "predict"), cfg.model.n_pop);
  } else if (!data) {
    throw ConfigError("predict needs --posterior, or --data to fit a posterior at each cutoff");
  }

  io::CsvWriter check({"cutoff", "day", "observed", "q025", "q50", "q975", "covered"});
  bool any_check = false;
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    const double cutoff = cutoffs[k];
    std::vector<PosteriorDraw> draws;
    if (given && cfg.predict.refilter) {
      const auto train = up_to(*data, cutoff);
      if (train.empty()) throw DataError(fmt::format("no observations on or before cutoff day {}", cutoff));
      std::vector<PosteriorDraw> thinned;
      for (auto u : thin_indices(given->size(), cfg.predict.draws)) thinned.push_back((*given)[u]);
      FilterOptions filter;
      filter.particles = cfg.schedule.particles;
      filter.sim = cfg.sim;
      filter.resampling = cfg.resampling;
      draws = refilter_final_states(thinned, train, setup.design, filter, StreamKey{cfg.seed, kPredictNs}.child({k, 1}));
      if (log && draws.size() < thinned.size()) {
        log(fmt::format("warning: {} of {} draws lost to particle death at cutoff {}", thinned.size() - draws.size(),
                        thinned.size(), day_label(cutoff)));
      }
    } else if (given) {
      draws = *given;
    } else {
      const auto train = up_to(*data, cutoff);
      if (train.empty()) throw DataError(fmt::format("no observations on or before cutoff day {}", cutoff));
      if (log) log(fmt::format("fitting {} observations up to day {}", train.size(), day_label(cutoff)));
      PipelineResult fit = fit_posterior(cfg, train, setup.design, StreamKey{cfg.seed, kFitNs}.child({k}));
      draws = std::move(fit.draws);
      io::write_posterior(out(fmt::format("posterior_{}.csv", day_label(cutoff))), draws);
    }
    PredictOptions opt;
    opt.cutoff = cutoff;
    opt.horizon_end = cutoff + cfg.predict.horizon_days;
    opt.observation_times = horizon_times(cfg, data ? &*data : nullptr, cutoff, opt.horizon_end);
    opt.draws_used = cfg.predict.draws;
    opt.replicates_per_draw = cfg.predict.replicates;
    opt.per_draw_means = cfg.predict.per_draw_means;
    opt.sim = cfg.sim;
    if (cfg.forcing.mode == ForcingMode::kCovariates && cfg.predict.respect_lag) {
      opt.forcing_known_until = cutoff + static_cast<double>(cfg.forcing.kappa);
      opt.lag_days = cfg.forcing.kappa;
    }
    const PredictionRun run = posterior_predict(draws, setup.design, opt, StreamKey{cfg.seed, kPredictNs}.child({k, 0}));
    const std::string label = day_label(cutoff);
    io::write_prediction(out(fmt::format("prediction_{}.csv", label)), run);
    io::write_hidden_quantiles(out(fmt::format("hidden_quantiles_{}.csv", label)), run);
    io::write_prediction_intervals(out(fmt::format("prediction_intervals_{}.csv", label)), run);
    if (data) {
      for (std::size_t j = 0; j < run.times.size(); ++j) {
        const auto hit = std::find_if(data->begin(), data->end(), [&](const Observation& o) { return o.t == run.times[j]; });
        if (hit == data->end()) continue;
        const auto& q = run.count_quantiles[j];
        const auto y = static_cast<double>(hit->y);
        check.row({label, io::format_number(run.times[j]), fmt::format("{}", hit->y), io::format_number(q[0]),
                   io::format_number(q[1]), io::format_number(q[2]), (y >= q[0] && y <= q[2]) ? "1" : "0"});
        any_check = true;
      }
    }
  }
  if (any_check) check.save(out("prediction_check.csv"));
}

void run_diagnose(const RunConfig& cfg, const ForcingSetup& setup, Outputs& out) {
  const auto obs = io::read_cases(require_input(cfg.inputs.data, "--data", "diagnose"));
  const auto draws =
      io::read_posterior(require_input(cfg.inputs.posterior, "--posterior", "diagnose"), cfg.model.n_pop);
  const std::size_t n_alpha = draws.front().theta.n_alpha();
  if (n_alpha != cfg.model.alpha.size()) {
    throw DataError(fmt::format("posterior has {} forcing coefficients but the config has {}", n_alpha,
                                cfg.model.alpha.size()));
  }

  // Effective sample sizes and marginal summaries.
  const auto names = transformed_names(n_alpha);
  std::vector<io::NamedEss> ess;
  io::CsvWriter summary({"parameter", "q025", "q50", "q975"});
  auto add_series = [&](const std::string& name, const std::vector<double>& series, bool with_ess) {
    if (with_ess) {
      io::NamedEss row{name, std::nullopt};
      if (series.size() >= 10) row.result = effective_sample_size(series);
      ess.push_back(row);
    }
    const auto q = quantiles(series, kCentralLevels);
    summary.row({name, io::format_number(q[0]), io::format_number(q[1]), io::format_number(q[2])});
  };
  std::vector<double> series(draws.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (std::size_t u = 0; u < draws.size(); ++u) series[u] = draws[u].theta[j];
    add_series(names[j], series, true);
  }
  for (std::size_t u = 0; u < draws.size(); ++u) series[u] = draws[u].log_lik_hat;
  add_series("log_lik_hat", series, true);
  const double n_pop = static_cast<double>(cfg.model.n_pop);
  for (std::size_t u = 0; u < draws.size(); ++u) series[u] = draws[u].natural->beta * n_pop;
  add_series("beta_times_n", series, false);
  for (std::size_t u = 0; u < draws.size(); ++u) series[u] = draws[u].natural->rho * n_pop;
  add_series("rho_times_n", series, false);
  for (std::size_t u = 0; u < draws.size(); ++u) series[u] = 1.0 / draws[u].natural->gamma;
  add_series("infectious_days", series, false);
  io::write_ess(out("ess.csv"), ess);
  summary.save(out("posterior_summary.csv"));

  const ModelParams median = posterior_median_params(draws, cfg.model, cfg.prior.fixed);
  ResidualOptions ro;
  ro.simulations = cfg.diagnose.residual_simulations;
  ro.sim = cfg.sim;
  ro.sim.method = cfg.diagnose.residual_method;
  const auto residuals = standardized_residuals(obs, median, setup.design.evaluate(median.alpha), ro,
                                                StreamKey{cfg.seed, kDiagnoseNs}.child({tag(Purpose::kResidual)}));
  io::write_residuals(out("residuals.csv"), residuals);

  DecompositionOptions dopt;
  dopt.samples = cfg.diagnose.decomposition_samples;
  dopt.start_day = static_cast<std::int64_t>(std::floor(obs.front().t));
  dopt.end_day = static_cast<std::int64_t>(std::floor(obs.back().t)) + 1;
  dopt.sim = cfg.sim;
  const auto days = transmission_decomposition(draws, setup.design, dopt,
                                               StreamKey{cfg.seed, kDiagnoseNs}.child({tag(Purpose::kDecomposition)}));
  io::write_decomposition(out("decomposition.csv"), days);
}

Eigen::MatrixXd design_rows(const ForcingDesign& design, const std::vector<double>& days) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(days.size()), static_cast<Eigen::Index>(design.n_coefficients()));
  for (std::size_t r = 0; r < days.size(); ++r) {
    const auto day = static_cast<std::int64_t>(std::floor(days[r]));
    if (day < design.start_day() || day >= design.end_day()) {
      throw DataError(fmt::format("day {} lies outside the forcing window [{}, {})", io::format_number(days[r]),
                                  design.start_day(), design.end_day()));
    }
    const auto rr = static_cast<Eigen::Index>(r);
    x(rr, 0) = 1.0;
    for (std::size_t j = 0; j < design.n_covariates(); ++j) {
      x(rr, static_cast<Eigen::Index>(j + 1)) = design.covariate(day, j);
    }
  }
  return x;
}

void run_baseline(const RunConfig& cfg, const ForcingSetup& setup, Outputs& out) {
  const auto obs = io::read_cases(require_input(cfg.inputs.data, "--data", "baseline"));
  std::optional<double> cutoff = cfg.inputs.cutoff_day ? cfg.inputs.cutoff_day : cfg.baseline.cutoff;
  std::vector<double> train_days, y;
  for (const auto& o : obs) {
    if (cutoff && o.t > *cutoff) continue;
    train_days.push_back(o.t);
    y.push_back(static_cast<double>(o.y));
  }
  if (train_days.empty()) throw DataError("no observations to fit the baseline regression");
  const QuasiPoissonFit fit = fit_quasi_poisson(y, design_rows(setup.design, train_days));
  io::write_baseline_coefficients(out("baseline_coefficients.csv"), fit, setup.terms);

  std::vector<double> days;
  for (std::int64_t d = setup.design.start_day(); d < setup.design.end_day(); ++d) {
    if (!cutoff || static_cast<double>(d) > *cutoff) days.push_back(static_cast<double>(d));
  }
  const auto pred = predict_quasi_poisson(fit, design_rows(setup.design, days));
  io::write_baseline_prediction(out("baseline_prediction.csv"), days, pred);
}

}  // namespace

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kSimulate:
      return "simulate";
    case Pipeline::kFit:
      return "fit";
    case Pipeline::kPredict:
      return "predict";
    case Pipeline::kDiagnose:
      return "diagnose";
    case Pipeline::kBaseline:
      return "baseline";
  }
  return "unknown";
}

Pipeline parse_pipeline(std::string_view name) {
  for (Pipeline p : {Pipeline::kSimulate, Pipeline::kFit, Pipeline::kPredict, Pipeline::kDiagnose,
                     Pipeline::kBaseline}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError(fmt::format("unknown pipeline '{}'", name));
}

ForcingSetup make_forcing_setup(const RunConfig& cfg) {
  const auto& f = cfg.forcing;
  ForcingSetup setup;
  setup.terms = {"intercept"};
  switch (f.mode) {
    case ForcingMode::kSinusoid:
      setup.design = ForcingDesign::sinusoid(f.start_day, f.end_day, f.period_days);
      setup.terms.emplace_back("sin");
      break;
    case ForcingMode::kConstant:
      setup.design = ForcingDesign::intercept_only(f.start_day, f.end_day);
      break;
    case ForcingMode::kCovariates: {
      const auto& path = require_input(cfg.inputs.covariates, "--covariates", "covariate forcing");
      const auto samples = io::read_covariates(path);
      std::vector<std::string> names = f.covariates.empty() ? covariate_names(samples) : f.covariates;
      if (cfg.model.alpha.size() != names.size() + 1) {
        throw ConfigError(fmt::format("[model] alpha: {} covariates take {} coefficients, got {}", names.size(),
                                      names.size() + 1, cfg.model.alpha.size()));
      }
      std::vector<SmoothedCovariate> smoothed;
      for (const auto& name : names) {
        const auto subset = samples_named(samples, name);
        if (subset.empty()) throw DataError(fmt::format("{}: no samples of covariate '{}'", path.string(), name));
        try {
          smoothed.push_back(smooth_covariate(subset, f.start_day - f.kappa, f.end_day - f.kappa, f.knot_spacing));
        } catch (const DataError& e) {
          throw DataError(fmt::format("{}: covariate '{}': {}", path.string(), name, e.what()));
        }
        for (const auto& w : smoothed.back().warnings) {
          setup.warnings.push_back(fmt::format("covariate '{}': {}", name, w));
        }
        setup.terms.push_back(name);
      }
      setup.design = build_design(smoothed, f.kappa, f.start_day, f.end_day);
      break;
    }
  }
  return setup;
}

PipelineResult fit_posterior(const RunConfig& cfg, const std::vector<Observation>& obs, const ForcingDesign& design,
                             const StreamKey& key) {
  cfg.schedule.validate();
  FilterOptions filter;
  filter.particles = cfg.schedule.particles;
  filter.sim = cfg.sim;
  filter.resampling = cfg.resampling;
  filter.store_trajectory = true;
  const Target target = make_sirs_target(obs, design, cfg.model, cfg.prior, filter);
  if (target.active.empty()) throw ConfigError("[prior] every parameter is fixed; nothing to fit");
  PipelineOptions options;
  options.keep_trajectories = false;
  if (cfg.step_sds.size() == 1) {
    options.step_sds.assign(target.active.size(), cfg.step_sds.front());
  } else {
    options.step_sds = cfg.step_sds;
  }
  options.final_scale = cfg.final_scale;
  return run_pipeline(target, cfg.schedule, to_transformed(cfg.start_params()), key, options);
}

RunReport execute(Pipeline pipeline, RunConfig config, const fs::path& out_dir, const LogFn& log) {
  for (auto* p : {&config.inputs.data, &config.inputs.covariates, &config.inputs.posterior}) {
    if (*p) *p = fs::absolute(**p).lexically_normal();
  }
  config.validate();
  RunReport report;
  Outputs out(out_dir, report);
  const ForcingSetup setup = make_forcing_setup(config);
  report.warnings = setup.warnings;
  if (log) {
    for (const auto& w : setup.warnings) log(fmt::format("warning: {}", w));
  }
  switch (pipeline) {
    case Pipeline::kSimulate:
      run_simulate(config, setup, out);
      break;
    case Pipeline::kFit:
      run_fit(config, setup, out);
      break;
    case Pipeline::kPredict:
      run_predict(config, setup, out, log);
      break;
    case Pipeline::kDiagnose:
      run_diagnose(config, setup, out);
      break;
    case Pipeline::kBaseline:
      run_baseline(config, setup, out);
      break;
  }
  io::write_text(out("manifest.ini"), manifest_text(config, std::string(to_string(pipeline))));
  return report;
}

}  // namespace sirs
