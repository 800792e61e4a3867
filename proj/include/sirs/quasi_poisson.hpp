#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sirs {

// Log-link Poisson regression fitted by IRLS, with a Pearson dispersion
// estimate that scales standard errors (quasi-Poisson).
struct QuasiPoissonFit {
  Eigen::VectorXd coefficients;
  // (X' W X)^{-1} at the solution; multiply by dispersion for the
  // quasi-Poisson covariance.
  Eigen::MatrixXd unscaled_covariance;
  double dispersion = 1.0;
  // False when n == p and the Pearson estimate is undefined; dispersion is
  // then 1.
  bool dispersion_estimated = true;
  int iterations = 0;
  double deviance = 0.0;

  Eigen::MatrixXd covariance() const { return dispersion * unscaled_covariance; }
};

struct QuasiPoissonOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

// Throws ConfigError when X is rank deficient or mismatched with y,
// DataError for negative counts and NumericalError when IRLS does not
// reach the tolerance.
QuasiPoissonFit fit_quasi_poisson(std::span<const double> y, const Eigen::MatrixXd& x,
                                  const QuasiPoissonOptions& options = {});

struct QuasiPoissonPrediction {
  std::vector<double> mean, lower, upper;
  // Standard error of the linear predictor, dispersion included.
  std::vector<double> se_link;
};

// Means exp(x b) with 95% intervals from delta-method standard errors of the
// linear predictor, scaled by sqrt(dispersion) and exponentiated.
QuasiPoissonPrediction predict_quasi_poisson(const QuasiPoissonFit& fit, const Eigen::MatrixXd& x_future);

}  // namespace sirs
