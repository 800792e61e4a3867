#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sirs {

// Environmental force of infection as a step function: one constant value
// per day interval [d, d + 1) for d in [start_day, end_day).
class DailyForcing {
 public:
  DailyForcing() = default;
  DailyForcing(std::int64_t start_day, std::vector<double> values);

  static DailyForcing constant(std::int64_t start_day, std::int64_t end_day, double value);

  std::int64_t start_day() const { return start_day_; }
  std::int64_t end_day() const { return start_day_ + static_cast<std::int64_t>(values_.size()); }
  std::span<const double> values() const { return values_; }

  // Value on the day containing t; throws DataError outside the covered range.
  double at(double t) const;
  double at_day(std::int64_t day) const;

  bool covers(double t_from, double t_to) const;
  // Throws DataError naming the first uncovered day.
  void require_covers(double t_from, double t_to) const;

 private:
  std::int64_t start_day_ = 0;
  std::vector<double> values_;
};

// Per-day covariate rows x_{d,1..k}. Evaluating with coefficients
// (a_0..a_k) gives alpha_d = exp(a_0 + sum_j a_j x_{d,j}).
class ForcingDesign {
 public:
  ForcingDesign() = default;
  ForcingDesign(std::int64_t start_day, std::size_t n_covariates, std::vector<double> rows);

  // Single covariate sin(2 pi d / period).
  static ForcingDesign sinusoid(std::int64_t start_day, std::int64_t end_day, double period_days = 365.0);
  // No covariates: alpha is the constant exp(a_0).
  static ForcingDesign intercept_only(std::int64_t start_day, std::int64_t end_day);

  std::int64_t start_day() const { return start_day_; }
  std::int64_t end_day() const { return start_day_ + static_cast<std::int64_t>(n_days()); }
  std::size_t n_days() const { return n_covariates_ == 0 ? n_days_ : rows_.size() / n_covariates_; }
  std::size_t n_covariates() const { return n_covariates_; }
  std::size_t n_coefficients() const { return n_covariates_ + 1; }
  double covariate(std::int64_t day, std::size_t j) const;

  // Log of the forcing on one day.
  double log_alpha(std::int64_t day, std::span<const double> coeffs) const;
  DailyForcing evaluate(std::span<const double> coeffs) const;

 private:
  std::int64_t start_day_ = 0;
  std::size_t n_covariates_ = 0;
  std::size_t n_days_ = 0;
  std::vector<double> rows_;
};

}  // namespace sirs
