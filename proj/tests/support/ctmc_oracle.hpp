#pragma once

// Brute-force reference for tiny populations: enumerates every (S, I) with
// S + I <= N, builds the SIRS generator and propagates distributions with
// matrix exponentials, one per day segment of the step forcing. Independent
// of the simulators and of the particle filter.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace sirs::testing {

struct TinyModel {
  std::int64_t n_pop = 3;
  double beta = 0.0, gamma = 0.0, mu = 0.0, rho = 0.5;
  double phi_s = 1.0, phi_i = 1.0;
};

class CtmcOracle {
 public:
  explicit CtmcOracle(const TinyModel& m) : m_(m) {
    for (std::int64_t s = 0; s <= m.n_pop; ++s) {
      for (std::int64_t i = 0; s + i <= m.n_pop; ++i) {
        s_.push_back(s);
        i_.push_back(i);
      }
    }
  }

  int size() const { return static_cast<int>(s_.size()); }
  int index(std::int64_t s, std::int64_t i) const {
    for (int k = 0; k < size(); ++k) {
      if (s_[k] == s && i_[k] == i) return k;
    }
    return -1;
  }
  std::int64_t s_of(int k) const { return s_[k]; }
  std::int64_t i_of(int k) const { return i_[k]; }

  Eigen::MatrixXd generator(double alpha) const {
    const int n = size();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      const double s = static_cast<double>(s_[k]);
      const double i = static_cast<double>(i_[k]);
      const double r = static_cast<double>(m_.n_pop) - s - i;
      auto add = [&](std::int64_t s2, std::int64_t i2, double rate) {
        if (rate <= 0.0) return;
        q(k, index(s2, i2)) += rate;
        q(k, k) -= rate;
      };
      add(s_[k] - 1, i_[k] + 1, (m_.beta * i + alpha) * s);
      add(s_[k], i_[k] - 1, m_.gamma * i);
      add(s_[k] + 1, i_[k], m_.mu * r);
    }
    return q;
  }

  // Transition matrix over [t_from, t_to) with alpha(t) = alpha_of_day(floor t).
  template <class AlphaOfDay>
  Eigen::MatrixXd transition(double t_from, double t_to, AlphaOfDay alpha_of_day) const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(size(), size());
    double t = t_from;
    while (t < t_to) {
      const double day = std::floor(t);
      const double end = std::min(day + 1.0, t_to);
      const Eigen::MatrixXd step = (generator(alpha_of_day(static_cast<std::int64_t>(day))) * (end - t)).exp();
      p = p * step;
      t = end;
    }
    return p;
  }

  // Poisson initials conditioned on S + I <= N.
  Eigen::RowVectorXd initial() const {
    Eigen::RowVectorXd pi(size());
    for (int k = 0; k < size(); ++k) {
      pi(k) = poisson(s_[k], m_.phi_s) * poisson(i_[k], m_.phi_i);
    }
    return pi / pi.sum();
  }

  double emission(std::int64_t y, std::int64_t i) const {
    if (y > i) return 0.0;
    return std::exp(std::lgamma(i + 1.0) - std::lgamma(y + 1.0) - std::lgamma(i - y + 1.0)) *
           std::pow(m_.rho, static_cast<double>(y)) * std::pow(1.0 - m_.rho, static_cast<double>(i - y));
  }

  // Exact marginal likelihood of counts ys at times ts (forward algorithm).
  template <class AlphaOfDay>
  double likelihood(const std::vector<double>& ts, const std::vector<std::int64_t>& ys,
                    AlphaOfDay alpha_of_day) const {
    Eigen::RowVectorXd f = initial();
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (j > 0) f = f * transition(ts[j - 1], ts[j], alpha_of_day);
      for (int k = 0; k < size(); ++k) f(k) *= emission(ys[j], i_[k]);
    }
    return f.sum();
  }

 private:
  static double poisson(std::int64_t k, double mean) {
    return std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(k + 1.0));
  }

  TinyModel m_;
  std::vector<std::int64_t> s_, i_;
};

}  // namespace sirs::testing
