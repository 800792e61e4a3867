#include "sirs/covariates.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <unsupported/Eigen/Splines>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

using CubicSpline = Eigen::Spline<double, 1, 3>;
constexpr int kDegree = 3;

Eigen::Array<double, 1, Eigen::Dynamic> clamped_knots(double a, double b, double spacing) {
  std::vector<double> k(kDegree + 1, a);
  for (double x = a + spacing; x < b - 1e-9 * std::max(1.0, b - a); x += spacing) k.push_back(x);
  k.insert(k.end(), kDegree + 1, b);
  Eigen::Array<double, 1, Eigen::Dynamic> out(static_cast<Eigen::Index>(k.size()));
  for (std::size_t j = 0; j < k.size(); ++j) out(static_cast<Eigen::Index>(j)) = k[j];
  return out;
}

// Writes the nonzero cubic basis values at u into row r of m.
void basis_row(Eigen::MatrixXd& m, Eigen::Index r, double u, const CubicSpline::KnotVectorType& knots) {
  const Eigen::DenseIndex span = CubicSpline::Span(u, kDegree, knots);
  const auto b = CubicSpline::BasisFunctions(u, kDegree, knots);
  for (int j = 0; j <= kDegree; ++j) m(r, span - kDegree + j) = b(j);
}

}  // namespace

std::vector<std::string> covariate_names(std::span<const CovariateSample> samples) {
  std::vector<std::string> names;
  for (const auto& s : samples) {
    if (std::find(names.begin(), names.end(), s.name) == names.end()) names.push_back(s.name);
  }
  return names;
}

std::vector<CovariateSample> samples_named(std::span<const CovariateSample> samples, const std::string& name) {
  std::vector<CovariateSample> out;
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
               [&](const CovariateSample& s) { return s.name == name; });
  return out;
}

SmoothedCovariate smooth_covariate(std::span<const CovariateSample> samples, std::int64_t start_day,
                                   std::int64_t end_day, double knot_spacing) {
  const std::string name = samples.empty() ? std::string("covariate") : samples.front().name;
  if (samples.size() < 4) {
    throw DataError(fmt::format("covariate '{}' has {} samples; a cubic smooth needs at least 4", name,
                                samples.size()));
  }
  if (!(knot_spacing > 0.0)) throw ConfigError("knot spacing must be positive");
  if (end_day <= start_day) throw ConfigError("smoothing window is empty");
  double a = samples.front().day, b = a;
  for (const auto& s : samples) {
    if (!std::isfinite(s.value) || !std::isfinite(s.day)) {
      throw DataError(fmt::format("covariate '{}' has a non-finite sample on day {}", name, s.day));
    }
    a = std::min(a, s.day);
    b = std::max(b, s.day);
  }
  const auto last = static_cast<double>(end_day - 1);
  if (a > static_cast<double>(start_day) || b < last) {
    throw DataError(fmt::format("covariate '{}' samples span days [{}, {}] but values are needed on [{}, {}]", name, a,
                                b, start_day, end_day - 1));
  }

  SmoothedCovariate out;
  out.name = name;
  out.start_day = start_day;
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) y(r) = samples[static_cast<std::size_t>(r)].value;

  double spacing = knot_spacing;
  while (true) {
    const CubicSpline::KnotVectorType knots = clamped_knots(a, b, spacing);
    const Eigen::Index dim = knots.size() - kDegree - 1;
    const bool single_cubic = dim == kDegree + 1;
    Eigen::VectorXd coef;
    bool ok = dim <= n;
    if (ok) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, dim);
      for (Eigen::Index r = 0; r < n; ++r) basis_row(basis, r, samples[static_cast<std::size_t>(r)].day, knots);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
      ok = qr.rank() == dim;
      if (ok) coef = qr.solve(y);
    }
    if (ok) {
      out.knot_spacing = spacing;
      Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, dim);
      for (std::int64_t d = start_day; d < end_day; ++d) {
        row.setZero();
        basis_row(row, 0, static_cast<double>(d), knots);
        out.values.push_back((row * coef)(0));
      }
      return out;
    }
    if (single_cubic) {
      throw DataError(fmt::format("covariate '{}' samples do not determine even a single cubic", name));
    }
    const double wider = spacing * 2.0;
    out.warnings.push_back(fmt::format(
        "covariate '{}': {} samples cannot support knots every {} days; widening the spacing to {} days", name, n,
        spacing, wider));
    spacing = wider;
  }
}

Standardization standardization_of(std::span<const double> values, const std::string& name) {
  if (values.size() < 2) throw DataError(fmt::format("cannot standardize '{}' from fewer than 2 values", name));
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  if (!(sd > 0.0)) throw DataError(fmt::format("covariate '{}' is constant over the window; cannot standardize", name));
  return {m, sd};
}

ForcingDesign build_design(std::span<const SmoothedCovariate> covariates, std::int64_t kappa,
                           std::int64_t window_start, std::int64_t window_end) {
  if (kappa < 0) throw ConfigError(fmt::format("lag kappa must be nonnegative, got {}", kappa));
  if (window_end <= window_start) throw ConfigError("forcing window is empty");
  if (covariates.empty()) throw ConfigError("covariate forcing needs at least one covariate");
  const auto days = static_cast<std::size_t>(window_end - window_start);
  const std::size_t p = covariates.size();
  std::vector<double> rows(days * p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& c = covariates[j];
    std::vector<double> lagged(days);
    for (std::size_t k = 0; k < days; ++k) {
      const std::int64_t src = window_start + static_cast<std::int64_t>(k) - kappa;
      if (!c.has_day(src)) {
        throw DataError(fmt::format("forcing gap: covariate '{}' has no smoothed value for day {} (needed for day {} "
                                    "at lag {}); covered days are [{}, {})",
                                    c.name, src, src + kappa, kappa, c.start_day, c.end_day()));
      }
      lagged[k] = c.at(src);
    }
    const Standardization st = standardization_of(lagged, c.name);
    for (std::size_t k = 0; k < days; ++k) rows[k * p + j] = (lagged[k] - st.mean) / st.sd;
  }
  return ForcingDesign(window_start, p, std::move(rows));
}

DailyForcing build_forcing(std::span<const SmoothedCovariate> covariates, std::span<const double> alpha_coeffs,
                           std::int64_t kappa, std::int64_t window_start, std::int64_t window_end) {
  return build_design(covariates, kappa, window_start, window_end).evaluate(alpha_coeffs);
}

}  // namespace sirs
