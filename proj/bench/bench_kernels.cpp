// Serial reference kernels against their OpenMP counterparts, plus whole
// filter passes and forward prediction in both modes.

#include <benchmark/benchmark.h>

#include <vector>

#include "sirs/forecast.hpp"
#include "sirs/particle_filter.hpp"

namespace {

using namespace sirs;

ModelParams study_params() {
  ModelParams p;
  p.n_pop = 10000;
  p.beta = 1.25e-5;
  p.gamma = 0.1;
  p.mu = 0.0009;
  p.rho = 0.015;
  p.alpha = {-7.0, 3.5};
  p.phi_s = 2100;
  p.phi_i = 15;
  return p;
}

const DailyForcing& study_forcing() {
  static const DailyForcing f = ForcingDesign::sinusoid(0, 800).evaluate(study_params().alpha);
  return f;
}

std::vector<Observation> study_obs() {
  std::vector<Observation> obs;
  for (int k = 0; k * 14 < 730; ++k) obs.push_back({14.0 * k, k % 5});
  return obs;
}

template <bool Parallel>
void BM_Propagate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const ModelParams p = study_params();
  std::vector<HiddenState> start(k, HiddenState{2100, 60});
  std::vector<HiddenState> states;
  std::vector<double> lw(k);
  const StreamKey key{1, 2};
  std::uint64_t step = 0;
  for (auto _ : state) {
    states = start;
    // Two weeks into the seasonal peak.
    if constexpr (Parallel) {
      kernels::propagate_parallel(states, lw, 150.0, {164.0, 3}, study_forcing(), p, SimConfig{}, key, ++step);
    } else {
      kernels::propagate_serial(states, lw, 150.0, {164.0, 3}, study_forcing(), p, SimConfig{}, key, ++step);
    }
    benchmark::DoNotOptimize(lw.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k));
}

void BM_FilterPass(benchmark::State& state) {
  FilterOptions opt;
  opt.particles = static_cast<std::size_t>(state.range(0));
  opt.execution = state.range(1) ? Execution::kParallel : Execution::kSerial;
  opt.store_trajectory = false;
  const auto obs = study_obs();
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const FilterResult r = run_filter(obs, study_forcing(), study_params(), opt, StreamKey{3, ++rep});
    benchmark::DoNotOptimize(r.log_lik_hat);
  }
  state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_Predict(benchmark::State& state) {
  const ModelParams p = study_params();
  std::vector<PosteriorDraw> draws(500);
  for (auto& d : draws) {
    d.natural = p;
    d.final_state = {2000, 40};
    d.theta = to_transformed(p);
  }
  PredictOptions opt;
  opt.cutoff = 120.0;
  opt.horizon_end = 148.0;
  opt.observation_times = {134.0, 148.0};
  opt.execution = state.range(0) ? Execution::kParallel : Execution::kSerial;
  const ForcingDesign design = ForcingDesign::sinusoid(0, 800);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const PredictionRun run = posterior_predict(draws, design, opt, StreamKey{4, ++rep});
    benchmark::DoNotOptimize(run.counts.data());
  }
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Propagate, false)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK_TEMPLATE(BM_Propagate, true)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FilterPass)->Args({100, 0})->Args({100, 1})->Args({1000, 0})->Args({1000, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
