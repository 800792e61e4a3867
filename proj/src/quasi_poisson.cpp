#include "sirs/quasi_poisson.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

constexpr double kZ975 = 1.959963984540054;

double poisson_deviance(std::span<const double> y, const Eigen::VectorXd& mu) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    if (yi > 0.0) d += yi * std::log(yi / mu(i));
    d -= yi - mu(i);
  }
  return 2.0 * d;
}

}  // namespace

QuasiPoissonFit fit_quasi_poisson(std::span<const double> y, const Eigen::MatrixXd& x,
                                  const QuasiPoissonOptions& options) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) {
    throw ConfigError(fmt::format("design has {} rows but there are {} counts", n, y.size()));
  }
  if (p == 0 || n < p) throw ConfigError(fmt::format("cannot fit {} coefficients to {} counts", p, n));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0) || !std::isfinite(y[i])) {
      throw DataError(fmt::format("count {} at row {} is not a nonnegative number", y[i], i));
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(x);
  if (rank_check.rank() < p) {
    throw ConfigError(fmt::format("design matrix is rank deficient (rank {} < {} columns)", rank_check.rank(), p));
  }

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  // Standard GLM start: mu = y + 0.1.
  Eigen::VectorXd eta = (yv.array() + 0.1).log().matrix();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  QuasiPoissonFit fit;
  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd mu = eta.array().exp().matrix();
    const Eigen::VectorXd z = eta + ((yv - mu).array() / mu.array()).matrix();
    const Eigen::VectorXd sw = mu.array().sqrt().matrix();
    const Eigen::MatrixXd xw = sw.asDiagonal() * x;
    const Eigen::VectorXd next = xw.colPivHouseholderQr().solve((sw.array() * z.array()).matrix());
    if (!next.allFinite()) break;
    const double change = (next - beta).lpNorm<Eigen::Infinity>();
    const double scale = std::max(next.lpNorm<Eigen::Infinity>(), 1.0);
    beta = next;
    eta = x * beta;
    fit.iterations = it;
    if (it > 1 && change <= options.tolerance * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError(fmt::format("quasi-Poisson IRLS did not converge to relative change {} in {} iterations",
                                     options.tolerance, options.max_iterations));
  }

  const Eigen::VectorXd mu = eta.array().exp().matrix();
  const Eigen::MatrixXd xtwx = x.transpose() * mu.asDiagonal() * x;
  fit.coefficients = beta;
  fit.unscaled_covariance = xtwx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.deviance = poisson_deviance(y, mu);
  if (n > p) {
    const double pearson = ((yv - mu).array().square() / mu.array()).sum();
    // A perfect fit gives zero; keep the dispersion strictly positive.
    fit.dispersion = std::max(pearson / static_cast<double>(n - p), std::numeric_limits<double>::min());
  } else {
    fit.dispersion = 1.0;
    fit.dispersion_estimated = false;
  }
  return fit;
}

QuasiPoissonPrediction predict_quasi_poisson(const QuasiPoissonFit& fit, const Eigen::MatrixXd& x_future) {
  if (x_future.cols() != fit.coefficients.size()) {
    throw ConfigError(fmt::format("prediction design has {} columns, the fit has {} coefficients", x_future.cols(),
                                  fit.coefficients.size()));
  }
  QuasiPoissonPrediction out;
  const Eigen::MatrixXd cov = fit.covariance();
  for (Eigen::Index r = 0; r < x_future.rows(); ++r) {
    const Eigen::VectorXd row = x_future.row(r).transpose();
    const double eta = row.dot(fit.coefficients);
    const double se = std::sqrt(std::max(row.dot(cov * row), 0.0));
    out.mean.push_back(std::exp(eta));
    out.lower.push_back(std::exp(eta - kZ975 * se));
    out.upper.push_back(std::exp(eta + kZ975 * se));
    out.se_link.push_back(se);
  }
  return out;
}

}  // namespace sirs
