#pragma once

#include <span>
#include <vector>

namespace sirs {

enum class EssFlag {
  kNone,
  // The series never moves; ESS is reported as the series length.
  kConstant,
  // The estimate exceeded the series length (negative lag-1 correlation)
  // and was clamped to it.
  kClamped,
};

struct EssResult {
  double ess = 0.0;
  EssFlag flag = EssFlag::kNone;
};

// Effective sample size with Geyer's initial positive sequence: sums of
// adjacent autocorrelation pairs are accumulated until the first
// nonpositive pair. Requires at least 10 values.
EssResult effective_sample_size(std::span<const double> series);

// Sample quantile with linear interpolation between order statistics
// (type 7). Sorts a copy.
double quantile(std::span<const double> values, double q);

// Several quantiles off one sort.
std::vector<double> quantiles(std::span<const double> values, std::span<const double> levels);

double median(std::span<const double> values);

}  // namespace sirs
