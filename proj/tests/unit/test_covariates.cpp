#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "sirs/covariates.hpp"
#include "sirs/errors.hpp"

using namespace sirs;

namespace {

double cubic(double d) { return 1.0 + 0.01 * d - 1e-4 * d * d + 2e-7 * d * d * d; }

std::vector<CovariateSample> sampled(double (*f)(double), double first, double last, double step,
                                     const std::string& name = "depth") {
  std::vector<CovariateSample> out;
  int k = 0;
  for (double d = first; d <= last; d += step, ++k) {
    out.push_back({d, k % 2 == 0 ? "pond" : "river", name, f(d)});
  }
  return out;
}

SmoothedCovariate daily(const std::string& name, std::int64_t start, std::vector<double> values) {
  SmoothedCovariate c;
  c.name = name;
  c.start_day = start;
  c.values = std::move(values);
  return c;
}

}  // namespace

TEST_CASE("cubic samples are reproduced exactly") {
  const auto samples = sampled(cubic, -30.0, 400.0, 7.0);
  const SmoothedCovariate s = smooth_covariate(samples, -20, 390, 30.0);
  REQUIRE(s.values.size() == 410);
  CHECK(s.warnings.empty());
  CHECK(s.knot_spacing == 30.0);
  double worst = 0.0;
  for (std::int64_t d = -20; d < 390; ++d) worst = std::max(worst, std::abs(s.at(d) - cubic(static_cast<double>(d))));
  CHECK(worst < 1e-9);
}

TEST_CASE("constant samples give a constant smooth") {
  const auto samples = sampled([](double) { return 27.5; }, 0.0, 200.0, 10.0);
  const SmoothedCovariate s = smooth_covariate(samples, 0, 201);
  for (double v : s.values) CHECK(v == doctest::Approx(27.5).epsilon(1e-12));
}

TEST_CASE("sparse samples widen the knot spacing with a warning") {
  const auto samples = sampled(cubic, 0.0, 360.0, 60.0);  // 7 samples
  const SmoothedCovariate s = smooth_covariate(samples, 0, 361, 30.0);
  CHECK(s.knot_spacing > 30.0);
  CHECK_FALSE(s.warnings.empty());
  for (std::int64_t d = 0; d <= 360; d += 60) CHECK(s.at(d) == doctest::Approx(cubic(static_cast<double>(d))));
}

TEST_CASE("smoothing preconditions") {
  const auto few = sampled(cubic, 0.0, 30.0, 10.0);
  CHECK_THROWS_AS(smooth_covariate(std::span(few).first(3), 0, 20), DataError);
  const auto samples = sampled(cubic, 0.0, 100.0, 5.0);
  CHECK_THROWS_AS(smooth_covariate(samples, -5, 50), DataError);
  CHECK_THROWS_AS(smooth_covariate(samples, 0, 102), DataError);
}

TEST_CASE("standardized lagged design has mean 0 and sd 1 on the window") {
  const auto samples = sampled([](double d) { return 3.0 + std::sin(d / 40.0) + 1e-3 * d; }, -40.0, 500.0, 9.0);
  const SmoothedCovariate s = smooth_covariate(samples, -30, 480);
  const SmoothedCovariate covs[1] = {s};
  const ForcingDesign design = build_design(covs, 21, 0, 400);
  double m = 0.0, ss = 0.0;
  for (std::int64_t d = 0; d < 400; ++d) m += design.covariate(d, 0);
  m /= 400.0;
  for (std::int64_t d = 0; d < 400; ++d) ss += std::pow(design.covariate(d, 0) - m, 2);
  CHECK(std::abs(m) < 1e-9);
  CHECK(std::abs(std::sqrt(ss / 399.0) - 1.0) < 1e-9);
}

TEST_CASE("intercept-only coefficients give constant forcing") {
  std::vector<double> v;
  for (int d = 0; d < 100; ++d) v.push_back(std::cos(d / 7.0));
  const SmoothedCovariate covs[1] = {daily("temp", -50, v)};
  const double coeffs[2] = {-6.0, 0.0};
  const DailyForcing f = build_forcing(covs, coeffs, 10, 0, 40);
  for (double a : f.values()) CHECK(a == doctest::Approx(std::exp(-6.0)).epsilon(1e-15));
}

TEST_CASE("sinusoid forcing extremes over a year") {
  const ForcingDesign design = ForcingDesign::sinusoid(0, 365);
  const double coeffs[2] = {-7.0, 3.5};
  const DailyForcing f = design.evaluate(coeffs);
  double lo = INFINITY, hi = 0.0;
  for (double a : f.values()) {
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  // exp(-3.5) and exp(-10.5) are attained at quarter-days; integer days
  // land within 2.5e-4 (relative) of them.
  CHECK(hi <= 0.0301973834223185 * (1.0 + 1e-15));
  CHECK(hi == doctest::Approx(0.0301973834223185).epsilon(1e-4));
  CHECK(lo >= 2.753644934974716e-05 * (1.0 - 1e-15));
  CHECK(lo == doctest::Approx(2.753644934974716e-05).epsilon(1e-4));
}

TEST_CASE("two-covariate forcing against a 50-digit evaluator") {
  using Big = boost::multiprecision::cpp_dec_float_50;
  std::vector<double> wd, wt;
  for (int d = 0; d < 200; ++d) {
    wd.push_back(2.0 + std::sin(d / 15.0));
    wt.push_back(25.0 + 3.0 * std::cos(d / 31.0) + 0.01 * d);
  }
  const SmoothedCovariate covs[2] = {daily("depth", -30, wd), daily("temp", -30, wt)};
  const std::int64_t kappa = 14, start = 0, end = 150;
  const double coeffs[3] = {-8.0, 1.3, -0.7};
  const DailyForcing f = build_forcing(covs, coeffs, kappa, start, end);

  auto standardized = [&](const std::vector<double>& raw, std::int64_t day) {
    Big m = 0, ss = 0;
    for (std::int64_t i = start; i < end; ++i) m += Big(raw[static_cast<std::size_t>(i - kappa + 30)]);
    m /= Big(end - start);
    for (std::int64_t i = start; i < end; ++i) {
      const Big dv = Big(raw[static_cast<std::size_t>(i - kappa + 30)]) - m;
      ss += dv * dv;
    }
    const Big sd = boost::multiprecision::sqrt(ss / Big(end - start - 1));
    return (Big(raw[static_cast<std::size_t>(day - kappa + 30)]) - m) / sd;
  };
  for (std::int64_t day = start; day < end; ++day) {
    const Big eta = Big(coeffs[0]) + Big(coeffs[1]) * standardized(wd, day) + Big(coeffs[2]) * standardized(wt, day);
    const double expected = static_cast<double>(boost::multiprecision::exp(eta));
    CHECK(f.at_day(day) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("shifting covariates by kappa with zero lag equals the lagged run") {
  std::vector<double> v;
  for (int d = 0; d < 300; ++d) v.push_back(std::sin(d / 20.0) + 0.002 * d);
  const std::int64_t kappa = 21;
  const SmoothedCovariate original[1] = {daily("depth", -40, v)};
  const SmoothedCovariate shifted[1] = {daily("depth", -40 + kappa, v)};
  const double coeffs[2] = {-7.0, 2.0};
  const DailyForcing lagged = build_forcing(original, coeffs, kappa, 0, 200);
  const DailyForcing direct = build_forcing(shifted, coeffs, 0, 0, 200);
  for (std::int64_t d = 0; d < 200; ++d) CHECK(lagged.at_day(d) == direct.at_day(d));
}

TEST_CASE("coverage gaps name the first missing day") {
  const SmoothedCovariate covs[1] = {daily("depth", 0, std::vector<double>(100, 1.0))};
  try {
    build_design(covs, 21, 10, 90);
    FAIL("expected a coverage error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("day -11") != std::string::npos);
  }
  CHECK_THROWS_AS(build_design(covs, -1, 30, 90), ConfigError);
}
