#include "sirs/forcing.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

DailyForcing::DailyForcing(std::int64_t start_day, std::vector<double> values)
    : start_day_(start_day), values_(std::move(values)) {
  for (std::size_t d = 0; d < values_.size(); ++d) {
    if (!std::isfinite(values_[d]) || values_[d] < 0.0) {
      throw DataError(fmt::format("forcing on day {} is {}; values must be finite and nonnegative",
                                  start_day_ + static_cast<std::int64_t>(d), values_[d]));
    }
  }
}

DailyForcing DailyForcing::constant(std::int64_t start_day, std::int64_t end_day, double value) {
  return DailyForcing(start_day, std::vector<double>(static_cast<std::size_t>(end_day - start_day), value));
}

double DailyForcing::at_day(std::int64_t day) const {
  if (day < start_day_ || day >= end_day()) {
    throw DataError(fmt::format("forcing is undefined on day {} (covered: [{}, {}))", day, start_day_, end_day()));
  }
  return values_[static_cast<std::size_t>(day - start_day_)];
}

double DailyForcing::at(double t) const { return at_day(static_cast<std::int64_t>(std::floor(t))); }

bool DailyForcing::covers(double t_from, double t_to) const {
  if (!(t_to > t_from)) return true;
  return static_cast<std::int64_t>(std::floor(t_from)) >= start_day_ &&
         static_cast<std::int64_t>(std::ceil(t_to)) <= end_day();
}

void DailyForcing::require_covers(double t_from, double t_to) const {
  if (covers(t_from, t_to)) return;
  const auto first = static_cast<std::int64_t>(std::floor(t_from));
  const std::int64_t missing = first < start_day_ ? first : end_day();
  throw DataError(fmt::format("forcing gap: day {} is not covered (forcing spans [{}, {}), needed [{}, {}))",
                              missing, start_day_, end_day(), t_from, t_to));
}

ForcingDesign::ForcingDesign(std::int64_t start_day, std::size_t n_covariates, std::vector<double> rows)
    : start_day_(start_day), n_covariates_(n_covariates), rows_(std::move(rows)) {
  if (n_covariates_ == 0 || rows_.size() % n_covariates_ != 0) {
    throw DataError("covariate design rows must be a whole number of days");
  }
}

ForcingDesign ForcingDesign::sinusoid(std::int64_t start_day, std::int64_t end_day, double period_days) {
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(end_day - start_day));
  for (std::int64_t d = start_day; d < end_day; ++d) {
    rows.push_back(std::sin(2.0 * std::numbers::pi * static_cast<double>(d) / period_days));
  }
  return ForcingDesign(start_day, 1, std::move(rows));
}

ForcingDesign ForcingDesign::intercept_only(std::int64_t start_day, std::int64_t end_day) {
  ForcingDesign out;
  out.start_day_ = start_day;
  out.n_covariates_ = 0;
  out.n_days_ = static_cast<std::size_t>(end_day - start_day);
  return out;
}

double ForcingDesign::covariate(std::int64_t day, std::size_t j) const {
  return rows_[static_cast<std::size_t>(day - start_day_) * n_covariates_ + j];
}

double ForcingDesign::log_alpha(std::int64_t day, std::span<const double> coeffs) const {
  if (coeffs.size() != n_coefficients()) {
    throw ConfigError(fmt::format("forcing needs {} coefficients, got {}", n_coefficients(), coeffs.size()));
  }
  if (day < start_day_ || day >= end_day()) {
    throw DataError(fmt::format("forcing design does not cover day {}", day));
  }
  double eta = coeffs[0];
  for (std::size_t j = 0; j < n_covariates_; ++j) {
    eta += coeffs[j + 1] * covariate(day, j);
  }
  return eta;
}

DailyForcing ForcingDesign::evaluate(std::span<const double> coeffs) const {
  std::vector<double> values(n_days());
  for (std::size_t d = 0; d < values.size(); ++d) {
    values[d] = std::exp(log_alpha(start_day_ + static_cast<std::int64_t>(d), coeffs));
  }
  return DailyForcing(start_day_, std::move(values));
}

}  // namespace sirs
