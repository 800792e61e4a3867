#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sirs {

// SIRS parameters on their natural scale. Rates are per day.
struct ModelParams {
  double beta = 0.0;           // contact rate per infected per susceptible
  double gamma = 0.0;          // recovery rate
  double mu = 0.0;             // immunity-loss rate
  double rho = 0.5;            // reporting probability
  std::vector<double> alpha;   // log-linear forcing coefficients alpha_0..alpha_k
  double phi_s = 0.0;          // Poisson mean of the initial susceptible count
  double phi_i = 0.0;          // Poisson mean of the initial infected count
  std::int64_t n_pop = 1;      // closed population size

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

// (S, I) counts; R is implied by the population size.
struct HiddenState {
  std::int64_t s = 0;
  std::int64_t i = 0;

  std::int64_t recovered(std::int64_t n_pop) const { return n_pop - s - i; }
  bool valid(std::int64_t n_pop) const { return s >= 0 && i >= 0 && s + i <= n_pop; }
  friend bool operator==(const HiddenState&, const HiddenState&) = default;
};

struct Hazards {
  double infection = 0.0;
  double recovery = 0.0;
  double waning = 0.0;

  double total() const { return infection + recovery + waning; }
};

// h1 = (beta*I + alpha_t)*S, h2 = gamma*I, h3 = mu*R.
Hazards hazard_rates(const HiddenState& state, double alpha_t, const ModelParams& params);

// (beta * N) / gamma: the part of the reproductive number driven by infecteds.
double reproduction_ratio(const ModelParams& params);

// Unconstrained parameter vector in the fixed order
//   log beta, log gamma, log mu, logit rho, alpha_0..alpha_k, log phi_s, log phi_i.
class TransformedParams {
 public:
  TransformedParams() = default;
  TransformedParams(std::vector<double> values, std::size_t n_alpha);

  static constexpr std::size_t kLogBeta = 0;
  static constexpr std::size_t kLogGamma = 1;
  static constexpr std::size_t kLogMu = 2;
  static constexpr std::size_t kLogitRho = 3;
  static constexpr std::size_t kAlpha0 = 4;

  std::size_t size() const { return values_.size(); }
  std::size_t n_alpha() const { return n_alpha_; }
  std::size_t alpha_index(std::size_t j) const { return kAlpha0 + j; }
  std::size_t log_phi_s_index() const { return kAlpha0 + n_alpha_; }
  std::size_t log_phi_i_index() const { return kAlpha0 + n_alpha_ + 1; }

  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Column names, e.g. "log_beta", "alpha_1", "log_phi_i".
  std::vector<std::string> names() const;

  friend bool operator==(const TransformedParams&, const TransformedParams&) = default;

 private:
  std::vector<double> values_;
  std::size_t n_alpha_ = 0;
};

std::vector<std::string> transformed_names(std::size_t n_alpha);
std::vector<std::string> natural_names();

TransformedParams to_transformed(const ModelParams& params);

// Maps back to the natural scale. Components flagged in `fixed_mask` are
// copied from `fixed`; n_pop always comes from `fixed`. Returns nullopt when
// the result is not a valid ModelParams (e.g. rho rounds to 0 or 1).
std::optional<ModelParams> try_from_transformed(const TransformedParams& v, const ModelParams& fixed,
                                                const std::vector<bool>& fixed_mask = {});

// Throwing variant of try_from_transformed.
ModelParams from_transformed(const TransformedParams& v, const ModelParams& fixed,
                             const std::vector<bool>& fixed_mask = {});

// Independent normal priors on the transformed scale plus the mask of
// components held constant. Masked components are never proposed and carry
// no prior density.
struct PriorSpec {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<bool> fixed;

  std::size_t size() const { return mean.size(); }
  std::size_t active_dimension() const;
  std::vector<std::size_t> active_indices() const;
  bool is_fixed(std::size_t idx) const { return idx < fixed.size() && fixed[idx]; }

  void validate() const;
};

double log_prior(const TransformedParams& v, const PriorSpec& prior);

double logit(double p);
double inv_logit(double x);

}  // namespace sirs
