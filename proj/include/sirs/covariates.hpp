#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sirs/forcing.hpp"

namespace sirs {

// One environmental measurement from one water body.
struct CovariateSample {
  double day = 0.0;
  std::string source_id;
  std::string name;
  double value = 0.0;
};

// Daily values of one covariate after smoothing.
struct SmoothedCovariate {
  std::string name;
  std::int64_t start_day = 0;
  std::vector<double> values;
  // Knot spacing actually used; larger than requested when widened.
  double knot_spacing = 0.0;
  std::vector<std::string> warnings;

  std::int64_t end_day() const { return start_day + static_cast<std::int64_t>(values.size()); }
  bool has_day(std::int64_t day) const { return day >= start_day && day < end_day(); }
  double at(std::int64_t day) const { return values[static_cast<std::size_t>(day - start_day)]; }
};

// Distinct covariate names in order of first appearance.
std::vector<std::string> covariate_names(std::span<const CovariateSample> samples);

std::vector<CovariateSample> samples_named(std::span<const CovariateSample> samples, const std::string& name);

// Least-squares cubic B-spline through the pooled samples (all sources)
// with uniform interior knots every knot_spacing days from the first
// sample, evaluated at integer days [start_day, end_day). When the basis is
// larger than the data supports the spacing is doubled, with a warning,
// down to a single cubic. Throws DataError with fewer than 4 samples or when
// the samples do not span the requested days.
SmoothedCovariate smooth_covariate(std::span<const CovariateSample> samples, std::int64_t start_day,
                                   std::int64_t end_day, double knot_spacing = 30.0);

struct Standardization {
  double mean = 0.0;
  double sd = 1.0;
};

// Mean and sample standard deviation; DataError for a constant series.
Standardization standardization_of(std::span<const double> values, const std::string& name = "covariate");

// Design rows for days [window_start, window_end): column j holds covariate
// j at day i - kappa, standardized with the mean and sd of exactly those
// lagged values. Throws DataError naming the first day not covered.
ForcingDesign build_design(std::span<const SmoothedCovariate> covariates, std::int64_t kappa,
                           std::int64_t window_start, std::int64_t window_end);

// alpha(i) = exp(alpha_0 + sum_j alpha_j C_j(i - kappa)) on the window.
DailyForcing build_forcing(std::span<const SmoothedCovariate> covariates, std::span<const double> alpha_coeffs,
                           std::int64_t kappa, std::int64_t window_start, std::int64_t window_end);

}  // namespace sirs
