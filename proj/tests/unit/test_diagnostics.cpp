#include <doctest.h>

#include <cmath>
#include <vector>

#include "sirs/diagnostics.hpp"
#include "sirs/errors.hpp"
#include "sirs/random.hpp"

using namespace sirs;

TEST_CASE("ESS of an independent normal series") {
  Rng rng(1, 2);
  std::vector<double> x(1000);
  for (auto& v : x) v = draw_normal(rng);
  const EssResult r = effective_sample_size(x);
  CHECK(r.flag == EssFlag::kNone);
  CHECK(r.ess > 800.0);
  CHECK(r.ess < 1200.0);
}

TEST_CASE("ESS of an AR(1) series matches n (1 - phi) / (1 + phi)") {
  const double phi = 0.9;
  const std::size_t n = 10000;
  Rng rng(3, 4);
  std::vector<double> x(n);
  x[0] = draw_normal(rng) / std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 1; t < n; ++t) x[t] = phi * x[t - 1] + draw_normal(rng);
  const double expected = static_cast<double>(n) * (1.0 - phi) / (1.0 + phi);
  const EssResult r = effective_sample_size(x);
  CHECK(std::abs(r.ess - expected) < 0.3 * expected);
}

TEST_CASE("ESS edge cases") {
  std::vector<double> alternating;
  for (int k = 0; k < 500; ++k) alternating.push_back(k % 2 == 0 ? 1.0 : -1.0);
  const EssResult alt = effective_sample_size(alternating);
  CHECK(alt.flag == EssFlag::kClamped);
  CHECK(alt.ess == 500.0);

  const std::vector<double> constant(50, 3.25);
  const EssResult c = effective_sample_size(constant);
  CHECK(c.flag == EssFlag::kConstant);
  CHECK(c.ess == 50.0);

  const std::vector<double> short_series(9, 1.0);
  CHECK_THROWS_AS(effective_sample_size(short_series), DataError);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> x{4.0, 1.0, 3.0, 2.0, 5.0};
  CHECK(quantile(x, 0.0) == 1.0);
  CHECK(quantile(x, 1.0) == 5.0);
  CHECK(median(x) == 3.0);
  CHECK(quantile(x, 0.1) == doctest::Approx(1.4));
  const std::vector<double> levels{0.025, 0.5, 0.975};
  const auto q = quantiles(x, levels);
  CHECK(q[0] <= q[1]);
  CHECK(q[1] <= q[2]);
  CHECK_THROWS_AS(quantile(x, 1.5), ConfigError);
  CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), DataError);
}
