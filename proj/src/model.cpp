#include "sirs/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

void ModelParams::validate() const {
  auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!(std::isfinite(gamma) && gamma > 0.0)) {
    throw ConfigError(fmt::format("gamma must be positive and finite, got {}", gamma));
  }
  if (!nonneg(beta) || !nonneg(mu) || !nonneg(phi_s) || !nonneg(phi_i)) {
    throw ConfigError(fmt::format("beta, mu, phi_s and phi_i must be nonnegative and finite (got {}, {}, {}, {})",
                                  beta, mu, phi_s, phi_i));
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    throw ConfigError(fmt::format("rho must lie strictly inside (0, 1), got {}", rho));
  }
  if (n_pop < 1) {
    throw ConfigError(fmt::format("population size must be at least 1, got {}", n_pop));
  }
  for (double a : alpha) {
    if (!std::isfinite(a)) {
      throw ConfigError("forcing coefficients must be finite");
    }
  }
}

Hazards hazard_rates(const HiddenState& state, double alpha_t, const ModelParams& params) {
  const auto s = static_cast<double>(state.s);
  const auto i = static_cast<double>(state.i);
  const auto r = static_cast<double>(state.recovered(params.n_pop));
  return {(params.beta * i + alpha_t) * s, params.gamma * i, params.mu * r};
}

double reproduction_ratio(const ModelParams& params) {
  return params.beta * static_cast<double>(params.n_pop) / params.gamma;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double inv_logit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

TransformedParams::TransformedParams(std::vector<double> values, std::size_t n_alpha)
    : values_(std::move(values)), n_alpha_(n_alpha) {
  if (values_.size() != n_alpha_ + 6) {
    throw ConfigError(fmt::format("transformed vector has {} entries, expected {} for {} forcing coefficients",
                                  values_.size(), n_alpha_ + 6, n_alpha_));
  }
}

std::vector<std::string> transformed_names(std::size_t n_alpha) {
  std::vector<std::string> out{"log_beta", "log_gamma", "log_mu", "logit_rho"};
  for (std::size_t j = 0; j < n_alpha; ++j) {
    out.push_back(fmt::format("alpha_{}", j));
  }
  out.emplace_back("log_phi_s");
  out.emplace_back("log_phi_i");
  return out;
}

std::vector<std::string> natural_names() {
  return {"beta", "gamma", "mu", "rho", "phi_s", "phi_i"};
}

std::vector<std::string> TransformedParams::names() const { return transformed_names(n_alpha_); }

TransformedParams to_transformed(const ModelParams& params) {
  std::vector<double> v;
  v.reserve(params.alpha.size() + 6);
  v.push_back(std::log(params.beta));
  v.push_back(std::log(params.gamma));
  v.push_back(std::log(params.mu));
  v.push_back(logit(params.rho));
  v.insert(v.end(), params.alpha.begin(), params.alpha.end());
  v.push_back(std::log(params.phi_s));
  v.push_back(std::log(params.phi_i));
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ConfigError("parameter transform produced a non-finite value; check rho is inside (0, 1)");
    }
  }
  return TransformedParams(std::move(v), params.alpha.size());
}

std::optional<ModelParams> try_from_transformed(const TransformedParams& v, const ModelParams& fixed,
                                                const std::vector<bool>& fixed_mask) {
  if (v.n_alpha() != fixed.alpha.size()) {
    return std::nullopt;
  }
  auto masked = [&](std::size_t idx) { return idx < fixed_mask.size() && fixed_mask[idx]; };
  ModelParams out = fixed;
  if (!masked(TransformedParams::kLogBeta)) out.beta = std::exp(v[TransformedParams::kLogBeta]);
  if (!masked(TransformedParams::kLogGamma)) out.gamma = std::exp(v[TransformedParams::kLogGamma]);
  if (!masked(TransformedParams::kLogMu)) out.mu = std::exp(v[TransformedParams::kLogMu]);
  if (!masked(TransformedParams::kLogitRho)) out.rho = inv_logit(v[TransformedParams::kLogitRho]);
  for (std::size_t j = 0; j < v.n_alpha(); ++j) {
    if (!masked(v.alpha_index(j))) out.alpha[j] = v[v.alpha_index(j)];
  }
  if (!masked(v.log_phi_s_index())) out.phi_s = std::exp(v[v.log_phi_s_index()]);
  if (!masked(v.log_phi_i_index())) out.phi_i = std::exp(v[v.log_phi_i_index()]);

  auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!nonneg(out.beta) || !(std::isfinite(out.gamma) && out.gamma > 0.0) || !nonneg(out.mu) ||
      !nonneg(out.phi_s) || !nonneg(out.phi_i) || !(out.rho > 0.0 && out.rho < 1.0)) {
    return std::nullopt;
  }
  for (double a : out.alpha) {
    if (!std::isfinite(a)) return std::nullopt;
  }
  return out;
}

ModelParams from_transformed(const TransformedParams& v, const ModelParams& fixed,
                             const std::vector<bool>& fixed_mask) {
  auto out = try_from_transformed(v, fixed, fixed_mask);
  if (!out) {
    throw ConfigError("transformed parameters map outside the valid natural parameter space");
  }
  return *out;
}

std::size_t PriorSpec::active_dimension() const { return active_indices().size(); }

std::vector<std::size_t> PriorSpec::active_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < mean.size(); ++j) {
    if (!is_fixed(j)) idx.push_back(j);
  }
  return idx;
}

void PriorSpec::validate() const {
  if (sd.size() != mean.size() || (!fixed.empty() && fixed.size() != mean.size())) {
    throw ConfigError("prior mean, sd and fixed mask must have equal lengths");
  }
  for (std::size_t j = 0; j < mean.size(); ++j) {
    if (is_fixed(j)) continue;
    if (!std::isfinite(mean[j]) || !(sd[j] > 0.0) || !std::isfinite(sd[j])) {
      throw ConfigError(fmt::format("prior component {} needs a finite mean and a positive sd", j));
    }
  }
}

double log_prior(const TransformedParams& v, const PriorSpec& prior) {
  if (v.size() != prior.size() || prior.sd.size() != prior.size()) {
    throw ConfigError(fmt::format("prior has {} components but the parameter vector has {}", prior.size(),
                                  v.size()));
  }
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double total = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (prior.is_fixed(j)) continue;
    const double z = (v[j] - prior.mean[j]) / prior.sd[j];
    total += -0.5 * z * z - std::log(prior.sd[j]) - kHalfLog2Pi;
  }
  return total;
}

}  // namespace sirs
