#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sirs/forcing.hpp"
#include "sirs/model.hpp"
#include "sirs/observation.hpp"
#include "sirs/particle_filter.hpp"
#include "sirs/random.hpp"

namespace sirs {

// Random-walk increment on the active (unmasked) components.
class ProposalSpec {
 public:
  enum class Mode { kIndependentNormals, kMultivariateNormal };

  static ProposalSpec independent(std::vector<double> step_sds, double scale = 1.0);
  // Factorizes scale * covariance; throws NumericalError unless it is
  // symmetric positive definite.
  static ProposalSpec multivariate(const Eigen::MatrixXd& covariance, double scale);

  Mode mode() const { return mode_; }
  std::size_t dimension() const { return static_cast<std::size_t>(factor_.rows()); }
  double scale() const { return scale_; }
  const std::vector<double>& step_sds() const { return step_sds_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  Eigen::VectorXd draw(Rng& rng) const;

 private:
  Mode mode_ = Mode::kIndependentNormals;
  std::vector<double> step_sds_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;  // lower-triangular, includes the scale
  double scale_ = 1.0;
};

struct ChainSchedule {
  std::size_t burn_in_iters = 10000;
  std::size_t secondary_iters = 10000;
  std::size_t final_iters = 50000;
  std::size_t thin = 10;
  std::size_t particles = 100;

  void validate() const;
};

// Likelihood estimate plus the auxiliary sample that travels with it.
struct Evaluation {
  double log_lik = 0.0;
  std::vector<HiddenState> trajectory;
  HiddenState final_state;
};

struct PosteriorDraw {
  TransformedParams theta;
  std::optional<ModelParams> natural;
  double log_lik_hat = 0.0;
  double log_prior = 0.0;
  std::vector<HiddenState> trajectory;
  HiddenState final_state;
  bool accepted = false;
};

// The posterior seen by the sampler: an (estimated) log-likelihood, a log
// prior, and the indices of the components it may move.
struct Target {
  std::function<Evaluation(const TransformedParams&, const StreamKey&)> log_likelihood;
  std::function<double(const TransformedParams&)> log_prior;
  std::vector<std::size_t> active;
  // Optional natural-scale mirror attached to each draw.
  std::function<std::optional<ModelParams>(const TransformedParams&)> natural;
};

// Bootstrap-filter likelihood for the hidden SIRS model. `fixed` carries the
// masked components and N; forcing is rebuilt from `design` for every theta.
Target make_sirs_target(std::vector<Observation> obs, ForcingDesign design, ModelParams fixed, PriorSpec prior,
                        FilterOptions filter);

// Evaluates the target at `theta`; used to start a chain.
PosteriorDraw evaluate_draw(const TransformedParams& theta, const Target& target, const StreamKey& key);

// One Metropolis-Hastings step with a symmetric random walk. On rejection the
// returned draw equals `current` (same log_lik_hat, never re-estimated) with
// accepted = false.
PosteriorDraw mh_step(const PosteriorDraw& current, const ProposalSpec& proposal, const Target& target,
                      const StreamKey& key);

struct PhaseStats {
  std::size_t iterations = 0;
  std::size_t accepted = 0;
  double acceptance_rate() const {
    return iterations == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(iterations);
  }
};

struct PipelineOptions {
  // Phase 1 and 2 step SDs on the active components; default 0.1 each.
  std::vector<double> step_sds;
  // Phase 3 covariance multiplier; default 2.38^2 / d.
  std::optional<double> final_scale;
  bool keep_trajectories = true;
  // Called after every iteration with (phase, iteration, draw).
  std::function<void(int, std::size_t, const PosteriorDraw&)> on_iteration;
};

struct PipelineResult {
  std::vector<PosteriorDraw> draws;         // final phase, thinned
  std::vector<PosteriorDraw> burn_in;       // thinned, diagnostics only
  std::vector<PosteriorDraw> secondary;     // thinned; source of the covariance
  PhaseStats burn_in_stats, secondary_stats, final_stats;
  Eigen::MatrixXd final_covariance;
  double final_scale = 0.0;
};

// Burn-in and secondary runs with independent normal steps, then a final run
// whose multivariate normal proposal uses the secondary run's empirical
// covariance. Throws NumericalError if the initial likelihood is -inf or the
// covariance cannot be factorized.
PipelineResult run_pipeline(const Target& target, const ChainSchedule& schedule, const TransformedParams& init,
                            const StreamKey& key, const PipelineOptions& options = {});

// Sample covariance of the active components across draws.
Eigen::MatrixXd empirical_covariance(std::span<const PosteriorDraw> draws, std::span<const std::size_t> active);

}  // namespace sirs
