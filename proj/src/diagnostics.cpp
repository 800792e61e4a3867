#include "sirs/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

EssResult effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 10) {
    throw DataError(fmt::format("effective sample size needs at least 10 values, got {}", n));
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (x[t] - mean) * (x[t + lag] - mean);
    return acc / static_cast<double>(n);
  };
  const auto nd = static_cast<double>(n);
  // Exact equality: rounding in the mean makes c0 of a constant series tiny but nonzero.
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return {nd, EssFlag::kConstant};
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return {nd, EssFlag::kConstant};

  double pair_sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double gamma_k = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (!(gamma_k > 0.0)) break;
    pair_sum += gamma_k;
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  if (!(tau >= 1.0)) return {nd, EssFlag::kClamped};
  return {nd / tau, EssFlag::kNone};
}

double quantile(std::span<const double> values, double q) {
  const double levels[1] = {q};
  return quantiles(values, levels)[0];
}

std::vector<double> quantiles(std::span<const double> values, std::span<const double> levels) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(levels.size());
  for (double q : levels) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError(fmt::format("quantile level {} is outside [0, 1]", q));
    out.push_back(sorted_quantile(sorted, q));
  }
  return out;
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

}  // namespace sirs
