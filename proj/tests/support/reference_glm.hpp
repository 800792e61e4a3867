#pragma once

// Reference Poisson regression by plain Newton-Raphson on the
// log-likelihood, in long double with hand-rolled Gaussian elimination.
// Shares no code with the library fit.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace sirs::testing {

struct ReferenceGlm {
  std::vector<double> beta;
  double dispersion = 0.0;
};

inline std::vector<long double> solve_dense(std::vector<std::vector<long double>> a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    long double acc = b[r];
    for (std::size_t k = r + 1; k < n; ++k) acc -= a[r][k] * x[k];
    x[r] = acc / a[r][r];
  }
  return x;
}

inline ReferenceGlm newton_poisson(const std::vector<double>& y, const Eigen::MatrixXd& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  long double ybar = 0;
  for (double v : y) ybar += v;
  ybar /= n;
  std::vector<long double> beta(p, 0.0L);
  beta[0] = std::log(ybar);  // first column is the intercept
  for (int it = 0; it < 200; ++it) {
    std::vector<long double> grad(p, 0.0L);
    std::vector<std::vector<long double>> info(p, std::vector<long double>(p, 0.0L));
    for (std::size_t i = 0; i < n; ++i) {
      long double eta = 0;
      for (std::size_t j = 0; j < p; ++j) eta += beta[j] * x(i, j);
      const long double mu = std::exp(eta);
      for (std::size_t j = 0; j < p; ++j) {
        grad[j] += (y[i] - mu) * x(i, j);
        for (std::size_t k = 0; k < p; ++k) info[j][k] += mu * x(i, j) * x(i, k);
      }
    }
    const auto step = solve_dense(info, grad);
    long double biggest = 0;
    for (std::size_t j = 0; j < p; ++j) {
      beta[j] += step[j];
      biggest = std::max(biggest, std::fabs(step[j]));
    }
    if (biggest < 1e-15L) break;
  }
  ReferenceGlm out;
  long double pearson = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double eta = 0;
    for (std::size_t j = 0; j < p; ++j) eta += beta[j] * x(i, j);
    const long double mu = std::exp(eta);
    pearson += (y[i] - mu) * (y[i] - mu) / mu;
  }
  for (auto b : beta) out.beta.push_back(static_cast<double>(b));
  out.dispersion = static_cast<double>(pearson / (n - p));
  return out;
}

}  // namespace sirs::testing
