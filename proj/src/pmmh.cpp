#include "sirs/pmmh.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

ProposalSpec ProposalSpec::independent(std::vector<double> step_sds, double scale) {
  if (!(scale > 0.0)) throw ConfigError("proposal scale must be positive");
  for (double sd : step_sds) {
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw ConfigError(fmt::format("proposal step sd must be positive, got {}", sd));
    }
  }
  ProposalSpec p;
  p.mode_ = Mode::kIndependentNormals;
  p.scale_ = scale;
  const auto d = static_cast<Eigen::Index>(step_sds.size());
  p.covariance_ = Eigen::MatrixXd::Zero(d, d);
  p.factor_ = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = step_sds[static_cast<std::size_t>(j)];
    p.covariance_(j, j) = sd * sd;
    p.factor_(j, j) = std::sqrt(scale) * sd;
  }
  p.step_sds_ = std::move(step_sds);
  return p;
}

ProposalSpec ProposalSpec::multivariate(const Eigen::MatrixXd& covariance, double scale) {
  if (!(scale > 0.0)) throw ConfigError("proposal scale must be positive");
  if (covariance.rows() != covariance.cols()) throw NumericalError("proposal covariance must be square");
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff()))) {
    throw NumericalError("proposal covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(scale * covariance);
  if (llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().allFinite()) {
    throw NumericalError("proposal covariance is not positive definite");
  }
  ProposalSpec p;
  p.mode_ = Mode::kMultivariateNormal;
  p.scale_ = scale;
  p.covariance_ = covariance;
  p.factor_ = llt.matrixL();
  return p;
}

Eigen::VectorXd ProposalSpec::draw(Rng& rng) const {
  Eigen::VectorXd z(factor_.rows());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = draw_normal(rng);
  return factor_.triangularView<Eigen::Lower>() * z;
}

void ChainSchedule::validate() const {
  if (burn_in_iters == 0 || secondary_iters == 0 || final_iters == 0) {
    throw ConfigError("every chain phase needs at least one iteration");
  }
  if (thin == 0) throw ConfigError("thin must be at least 1");
  if (particles == 0) throw ConfigError("the particle count must be at least 1");
  if (secondary_iters / thin < 2) {
    throw ConfigError("the secondary run must retain at least two draws to estimate a covariance");
  }
}

Target make_sirs_target(std::vector<Observation> obs, ForcingDesign design, ModelParams fixed, PriorSpec prior,
                        FilterOptions filter) {
  validate_observations(obs);
  prior.validate();
  if (design.n_coefficients() != fixed.alpha.size()) {
    throw ConfigError(fmt::format("forcing design expects {} coefficients but the model has {}",
                                  design.n_coefficients(), fixed.alpha.size()));
  }
  Target target;
  target.active = prior.active_indices();
  const std::vector<bool> mask = prior.fixed;
  target.natural = [fixed, mask](const TransformedParams& theta) {
    return try_from_transformed(theta, fixed, mask);
  };
  target.log_prior = [prior](const TransformedParams& theta) { return sirs::log_prior(theta, prior); };
  target.log_likelihood = [obs = std::move(obs), design = std::move(design), fixed, mask, filter](
                              const TransformedParams& theta, const StreamKey& key) -> Evaluation {
    const auto params = try_from_transformed(theta, fixed, mask);
    if (!params || params->phi_s + params->phi_i > static_cast<double>(params->n_pop)) {
      return {kNegInf, {}, {}};
    }
    const DailyForcing forcing = design.evaluate(params->alpha);
    FilterResult fr = run_filter(obs, forcing, *params, filter, key);
    Evaluation ev;
    ev.log_lik = fr.log_lik_hat;
    if (fr.alive() && !fr.trajectory.empty()) {
      ev.final_state = fr.trajectory.back();
      ev.trajectory = std::move(fr.trajectory);
    }
    return ev;
  };
  return target;
}

PosteriorDraw evaluate_draw(const TransformedParams& theta, const Target& target, const StreamKey& key) {
  PosteriorDraw d;
  d.theta = theta;
  d.log_prior = target.log_prior(theta);
  if (target.natural) d.natural = target.natural(theta);
  if (std::isfinite(d.log_prior)) {
    Evaluation ev = target.log_likelihood(theta, key.child({tag(Purpose::kFilter)}));
    d.log_lik_hat = ev.log_lik;
    d.trajectory = std::move(ev.trajectory);
    d.final_state = ev.final_state;
  } else {
    d.log_lik_hat = kNegInf;
  }
  d.accepted = true;
  return d;
}

PosteriorDraw mh_step(const PosteriorDraw& current, const ProposalSpec& proposal, const Target& target,
                      const StreamKey& key) {
  if (proposal.dimension() != target.active.size()) {
    throw ConfigError(fmt::format("proposal has dimension {} but the target moves {} components",
                                  proposal.dimension(), target.active.size()));
  }
  Rng prop_rng = key.rng({tag(Purpose::kProposal)});
  const Eigen::VectorXd eps = proposal.draw(prop_rng);
  TransformedParams theta = current.theta;
  for (std::size_t j = 0; j < target.active.size(); ++j) {
    theta[target.active[j]] += eps(static_cast<Eigen::Index>(j));
  }

  PosteriorDraw candidate = evaluate_draw(theta, target, key);
  const double log_ratio =
      (candidate.log_lik_hat + candidate.log_prior) - (current.log_lik_hat + current.log_prior);
  Rng acc_rng = key.rng({tag(Purpose::kAccept)});
  const double log_u = std::log(acc_rng.uniform_open());
  if (std::isfinite(candidate.log_lik_hat) && std::isfinite(candidate.log_prior) && log_u < log_ratio) {
    candidate.accepted = true;
    return candidate;
  }
  PosteriorDraw kept = current;
  kept.accepted = false;
  return kept;
}

Eigen::MatrixXd empirical_covariance(std::span<const PosteriorDraw> draws, std::span<const std::size_t> active) {
  const auto d = static_cast<Eigen::Index>(active.size());
  const auto n = static_cast<Eigen::Index>(draws.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      x(r, c) = draws[static_cast<std::size_t>(r)].theta[active[static_cast<std::size_t>(c)]];
    }
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
}

PipelineResult run_pipeline(const Target& target, const ChainSchedule& schedule, const TransformedParams& init,
                            const StreamKey& key, const PipelineOptions& options) {
  schedule.validate();
  const std::size_t d = target.active.size();
  if (d == 0) throw ConfigError("no parameters are free to sample");

  std::vector<double> sds = options.step_sds.empty() ? std::vector<double>(d, 0.1) : options.step_sds;
  if (sds.size() != d) {
    throw ConfigError(fmt::format("{} step sds given for {} active components", sds.size(), d));
  }
  const ProposalSpec initial_proposal = ProposalSpec::independent(sds);

  PosteriorDraw current = evaluate_draw(init, target, key.child({0, 0}));
  if (!std::isfinite(current.log_lik_hat) || !std::isfinite(current.log_prior)) {
    throw NumericalError(
        "the initial parameter values give a -inf likelihood estimate; choose starting values closer to the data");
  }

  PipelineResult result;
  auto strip = [&](PosteriorDraw d) {
    if (!options.keep_trajectories) d.trajectory.clear();
    return d;
  };
  auto run_phase = [&](int phase, std::size_t iters, const ProposalSpec& proposal, PhaseStats& stats,
                       std::vector<PosteriorDraw>& out) {
    for (std::size_t it = 1; it <= iters; ++it) {
      current = mh_step(current, proposal, target, key.child({static_cast<std::uint64_t>(phase), it}));
      ++stats.iterations;
      if (current.accepted) ++stats.accepted;
      if (it % schedule.thin == 0) out.push_back(strip(current));
      if (options.on_iteration) options.on_iteration(phase, it, current);
    }
  };

  run_phase(1, schedule.burn_in_iters, initial_proposal, result.burn_in_stats, result.burn_in);
  run_phase(2, schedule.secondary_iters, initial_proposal, result.secondary_stats, result.secondary);

  Eigen::MatrixXd cov = empirical_covariance(result.secondary, target.active);
  const double ridge = 1e-8 * cov.diagonal().mean();
  cov.diagonal().array() += ridge;
  result.final_covariance = cov;
  result.final_scale = options.final_scale.value_or(2.38 * 2.38 / static_cast<double>(d));
  ProposalSpec final_proposal;
  try {
    final_proposal = ProposalSpec::multivariate(cov, result.final_scale);
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format(
        "secondary-run covariance could not be factorized ({}); acceptance rate in that phase was {:.3f}", e.what(),
        result.secondary_stats.acceptance_rate()));
  }
  run_phase(3, schedule.final_iters, final_proposal, result.final_stats, result.draws);
  return result;
}

}  // namespace sirs
