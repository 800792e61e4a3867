#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "ctmc_oracle.hpp"
#include "sirs/errors.hpp"
#include "sirs/simulate.hpp"
#include "stats.hpp"

using namespace sirs;
using sirs::testing::CtmcOracle;
using sirs::testing::TinyModel;

namespace {

ModelParams tiny_params(double beta, double gamma, double mu, std::int64_t n = 3) {
  ModelParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.mu = mu;
  p.rho = 0.5;
  p.alpha = {0.0};
  p.phi_s = 1.0;
  p.phi_i = 1.0;
  p.n_pop = n;
  return p;
}

// Alternating low/high forcing so the day restarts are exercised.
DailyForcing step_forcing(std::int64_t days) {
  std::vector<double> v;
  for (std::int64_t d = 0; d < days; ++d) v.push_back(d % 2 == 0 ? 0.05 : 0.6);
  return DailyForcing(0, v);
}

double step_alpha(std::int64_t day) { return day % 2 == 0 ? 0.05 : 0.6; }

// Distribution of the final state from (s0, i0) over [t_from, t_to).
template <class Sampler>
std::vector<double> final_state_counts(const CtmcOracle& oracle, int runs, Sampler sample) {
  std::vector<double> counts(oracle.size(), 0.0);
  for (int r = 0; r < runs; ++r) {
    const HiddenState x = sample(r);
    counts[oracle.index(x.s, x.i)] += 1.0;
  }
  return counts;
}

std::vector<double> oracle_row(const CtmcOracle& oracle, HiddenState x0, double t_from, double t_to) {
  const Eigen::MatrixXd p = oracle.transition(t_from, t_to, step_alpha);
  std::vector<double> row(oracle.size());
  for (int k = 0; k < oracle.size(); ++k) row[k] = p(oracle.index(x0.s, x0.i), k);
  return row;
}

}  // namespace

TEST_CASE("method names parse") {
  CHECK(parse_sim_method("direct-exact") == SimMethod::kDirect);
  CHECK(parse_sim_method("first-reaction-exact") == SimMethod::kFirstReaction);
  CHECK(parse_sim_method("tau-leap") == SimMethod::kTauLeap);
  CHECK_THROWS_AS(parse_sim_method("euler"), ConfigError);
  CHECK(to_string(SimMethod::kFirstReaction) == "first-reaction-exact");
}

TEST_CASE("absorbing states do not move") {
  const ModelParams p = tiny_params(0.2, 0.3, 0.0, 5);
  const DailyForcing zero = DailyForcing::constant(0, 50, 0.0);
  StreamKey key{1, 1};
  for (SimMethod m : {SimMethod::kDirect, SimMethod::kFirstReaction, SimMethod::kTauLeap}) {
    SimConfig cfg;
    cfg.method = m;
    for (HiddenState x : {HiddenState{5, 0}, HiddenState{0, 0}, HiddenState{2, 0}}) {
      Rng rng = key.rng({static_cast<std::uint64_t>(m)});
      CHECK(simulate(x, 0.0, 40.0, zero, p, cfg, rng) == x);
    }
  }
  Rng rng(2, 2);
  CHECK_FALSE(direct_step(Hazards{}, rng).has_value());
  CHECK_FALSE(first_reaction_step(Hazards{}, rng).has_value());
}

TEST_CASE("interval and forcing coverage errors") {
  const ModelParams p = tiny_params(0.2, 0.3, 0.1);
  const DailyForcing f = DailyForcing::constant(0, 10, 0.1);
  Rng rng(3, 3);
  SimConfig cfg;
  CHECK_THROWS_AS(simulate({1, 1}, 5.0, 4.0, f, p, cfg, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate({1, 1}, 5.0, 10.5, f, p, cfg, rng), DataError);
  CHECK_THROWS_AS(simulate({1, 1}, -0.5, 3.0, f, p, cfg, rng), DataError);
  CHECK(simulate({1, 1}, 4.0, 4.0, f, p, cfg, rng) == HiddenState{1, 1});
}

TEST_CASE("recovery time of a lone infective is Exp(gamma) across day restarts") {
  const double gamma = 0.1;
  const ModelParams p = tiny_params(0.0, gamma, 0.0, 1);
  const double horizon = 400.0;
  const DailyForcing zero = DailyForcing::constant(0, 400, 0.0);
  StreamKey key{17, 4};
  std::vector<double> times;
  for (std::uint64_t r = 0; r < 1500; ++r) {
    // The event time is a deterministic function of the stream; locate it by bisection.
    auto recovered_by = [&](double t) {
      Rng rng = key.rng({r});
      return simulate_exact({0, 1}, 0.0, t, zero, p, rng).i == 0;
    };
    if (!recovered_by(horizon)) continue;  // probability exp(-40)
    double lo = 0.0, hi = horizon;
    for (int it = 0; it < 45; ++it) {
      const double mid = 0.5 * (lo + hi);
      (recovered_by(mid) ? hi : lo) = mid;
    }
    times.push_back(hi);
  }
  REQUIRE(times.size() == 1500);
  const double pv = sirs::testing::ks_pvalue(times, [&](double t) { return 1.0 - std::exp(-gamma * t); });
  CHECK(pv > 0.001);
}

TEST_CASE("first-reaction channel frequencies and waiting time") {
  const Hazards h{1.0, 1.0, 0.0};
  Rng rng(5, 0);
  const int n = 100000;
  int infections = 0;
  double wait_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto r = first_reaction_step(h, rng);
    REQUIRE(r.has_value());
    CHECK(r->event != Event::kWaning);
    if (r->event == Event::kInfection) ++infections;
    wait_sum += r->wait;
  }
  // Binomial(n, 1/2): sd = sqrt(n)/2.
  CHECK(std::abs(infections - n / 2.0) < 4.0 * std::sqrt(n) / 2.0);
  // min of two Exp(1) is Exp(2): mean 1/2, sd 1/2.
  CHECK(std::abs(wait_sum / n - 0.5) < 4.0 * 0.5 / std::sqrt(n));
}

TEST_CASE("direct method channel frequencies and waiting time") {
  const Hazards h{0.5, 1.5, 2.0};
  Rng rng(6, 0);
  const int n = 100000;
  std::vector<double> counts(3, 0.0);
  double wait_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto r = direct_step(h, rng);
    counts[static_cast<int>(r->event)] += 1.0;
    wait_sum += r->wait;
  }
  const std::vector<double> probs{0.125, 0.375, 0.5};
  CHECK(sirs::testing::chi_square_gof_pvalue(counts, probs) > 0.001);
  CHECK(std::abs(wait_sum / n - 0.25) < 4.0 * 0.25 / std::sqrt(n));
}

TEST_CASE("exact simulators match the matrix-exponential transition law (N = 3)") {
  TinyModel tm;
  tm.beta = 0.4;
  tm.gamma = 0.5;
  tm.mu = 0.3;
  const CtmcOracle oracle(tm);
  const ModelParams p = tiny_params(tm.beta, tm.gamma, tm.mu);
  const DailyForcing f = step_forcing(10);
  const HiddenState x0{2, 1};
  const double t_from = 0.3, t_to = 4.7;
  const auto probs = oracle_row(oracle, x0, t_from, t_to);
  const int runs = 20000;
  StreamKey key{99, 0};

  std::map<SimMethod, std::vector<double>> by_method;
  for (SimMethod m : {SimMethod::kDirect, SimMethod::kFirstReaction}) {
    by_method[m] = final_state_counts(oracle, runs, [&](int r) {
      Rng rng = key.rng({static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r)});
      return simulate_exact(x0, t_from, t_to, f, p, rng, m);
    });
    CHECK(sirs::testing::chi_square_gof_pvalue(by_method[m], probs) > 0.001);
  }
  CHECK(sirs::testing::chi_square_homogeneity_pvalue(by_method[SimMethod::kDirect],
                                                     by_method[SimMethod::kFirstReaction]) > 0.001);
}

TEST_CASE("splitting an interval does not change the law") {
  TinyModel tm;
  tm.beta = 0.4;
  tm.gamma = 0.5;
  tm.mu = 0.3;
  const CtmcOracle oracle(tm);
  const ModelParams p = tiny_params(tm.beta, tm.gamma, tm.mu);
  const DailyForcing f = step_forcing(10);
  const HiddenState x0{3, 0};
  const auto probs = oracle_row(oracle, x0, 0.0, 5.0);
  StreamKey key{123, 0};
  const auto counts = final_state_counts(oracle, 20000, [&](int r) {
    Rng rng = key.rng({static_cast<std::uint64_t>(r)});
    const HiddenState mid = simulate_exact(x0, 0.0, 2.3, f, p, rng);
    return simulate_exact(mid, 2.3, 5.0, f, p, rng);
  });
  CHECK(sirs::testing::chi_square_gof_pvalue(counts, probs) > 0.001);
}

TEST_CASE("every simulator keeps the population closed and nonnegative") {
  Rng meta(7, 7);
  StreamKey key{8, 8};
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(meta() % 2000);
    ModelParams p = tiny_params(std::exp(-12.0 + 10.0 * meta.uniform_open()), 0.05 + meta.uniform_open(),
                                0.2 * meta.uniform_open(), n);
    const auto s0 = static_cast<std::int64_t>(meta() % static_cast<std::uint64_t>(n + 1));
    const auto i0 = static_cast<std::int64_t>(meta() % static_cast<std::uint64_t>(n - s0 + 1));
    const DailyForcing f = DailyForcing::constant(0, 30, 0.01 * meta.uniform_open());
    for (SimMethod m : {SimMethod::kDirect, SimMethod::kFirstReaction, SimMethod::kTauLeap}) {
      SimConfig cfg;
      cfg.method = m;
      cfg.tau_days = 0.25 + meta.uniform_open();
      Rng rng = key.rng({trial, static_cast<std::uint64_t>(m)});
      HiddenState x{s0, i0};
      double t = 0.0;
      for (double t_next : {3.5, 10.0, 29.9}) {
        x = simulate(x, t, t_next, f, p, cfg, rng);
        CHECK(x.valid(n));
        CHECK(x.recovered(n) >= 0);
        t = t_next;
      }
    }
  }
}

TEST_CASE("tau-leap below the critical size is the exact direct method") {
  const ModelParams p = tiny_params(0.002, 0.2, 0.05, 200);
  const DailyForcing f = step_forcing(30);
  SimConfig cfg;
  cfg.method = SimMethod::kTauLeap;
  cfg.critical_size = p.n_pop + 1;
  StreamKey key{21, 0};
  for (std::uint64_t r = 0; r < 200; ++r) {
    Rng a = key.rng({r});
    Rng b = key.rng({r});
    CHECK(simulate_tau_leap({150, 20}, 0.5, 25.5, f, p, cfg, a) == simulate_exact({150, 20}, 0.5, 25.5, f, p, b));
  }
}

TEST_CASE("tau-leap increments are Poisson with mean h * tau") {
  ModelParams p = tiny_params(1e-4, 0.1, 0.01, 10000);
  const HiddenState x{6000, 300};
  const double alpha = 0.001, tau = 0.7;
  const Hazards h = hazard_rates(x, alpha, p);
  Rng rng(31, 0);
  const int n = 40000;
  std::vector<double> inf(n), rec(n), wan(n);
  for (int k = 0; k < n; ++k) {
    const EventCounts c = tau_leap_step(x, alpha, p, tau, rng);
    inf[k] = static_cast<double>(c.infections);
    rec[k] = static_cast<double>(c.recoveries);
    wan[k] = static_cast<double>(c.wanings);
  }
  const std::vector<std::pair<std::vector<double>*, double>> cases{
      {&inf, h.infection * tau}, {&rec, h.recovery * tau}, {&wan, h.waning * tau}};
  for (auto [xs, lambda] : cases) {
    const double m = sirs::testing::mean_of(*xs);
    const double v = sirs::testing::variance_of(*xs);
    CHECK(std::abs(m - lambda) < 4.0 * std::sqrt(lambda / n));
    // Var of the sample variance for Poisson: (lambda + 2 lambda^2 (n/(n-1))) / n, approximately.
    CHECK(std::abs(v - lambda) < 4.0 * std::sqrt((lambda + 2.0 * lambda * lambda) / n));
  }
}

TEST_CASE("tau-leap halving survives near-boundary states") {
  // Large hazards relative to the small infected pool force negative proposals.
  ModelParams p = tiny_params(1e-3, 5.0, 0.5, 100);
  const DailyForcing f = DailyForcing::constant(0, 20, 0.0);
  SimConfig cfg;
  cfg.critical_size = 2;
  cfg.tau_days = 1.0;
  StreamKey key{41, 0};
  for (std::uint64_t r = 0; r < 500; ++r) {
    Rng rng = key.rng({r});
    const HiddenState x = simulate_tau_leap({40, 30}, 0.0, 15.0, f, p, cfg, rng);
    CHECK(x.valid(p.n_pop));
  }
}
