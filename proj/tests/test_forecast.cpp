#include <cmath>
#include <vector>

#include "doctest.h"
#include "scalesim/errors.hpp"
#include "scalesim/forecast.hpp"
#include "scalesim/rng.hpp"

using namespace scalesim;

TEST_CASE("persistence tracks the last observation") {
  Forecaster f(ForecastMethod::persistence);
  f.fit(std::vector<double>{10, 20, 30});
  CHECK(f.forecast_values(3) == std::vector<double>{30, 30, 30});

  f.update(42);
  CHECK(f.forecast_values(1) == std::vector<double>{42});
}

TEST_CASE("ar least squares recovers the coefficient of a noiseless AR(1)") {
  Forecaster f(ForecastMethod::ar_ls, {.ar_order = 1});
  f.fit(std::vector<double>{1, 2, 4, 8, 16});
  REQUIRE(f.ar_coefficients().size() == 1);
  CHECK(f.ar_coefficients()[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("ar least squares recovers exact coefficients up to order 3") {
  // Bounded noiseless recurrences: decay, damped oscillation, offset + oscillation.
  const std::vector<std::vector<double>> cases = {
      {0.97},
      {1.5, -0.7},
      {2.902113032590307, -2.902113032590307, 1.0},
  };
  for (const auto& coefs : cases) {
    std::vector<double> series = {100.0, 95.0, 104.0};
    series.resize(coefs.size());  // p starting values
    for (std::size_t t = series.size(); t < 60; ++t) {
      double next = 0.0;
      for (std::size_t i = 0; i < coefs.size(); ++i) next += coefs[i] * series[t - 1 - i];
      series.push_back(next);
    }
    Forecaster f(ForecastMethod::ar_ls, {.ar_order = static_cast<int>(coefs.size())});
    f.fit(series);
    for (std::size_t i = 0; i < coefs.size(); ++i) {
      CHECK(f.ar_coefficients()[i] == doctest::Approx(coefs[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("des fit on a constant series reaches the fixed point") {
  Forecaster f(ForecastMethod::des);
  f.fit(std::vector<double>(20, 50.0));
  CHECK(f.des_level() == doctest::Approx(50.0));
  CHECK(f.des_trend() == doctest::Approx(0.0));
}

TEST_CASE("one des update moves level and trend by hand-computed amounts") {
  Forecaster f(ForecastMethod::des, {.des_alpha = 0.5, .des_beta = 0.5});
  f.fit(std::vector<double>{50, 50});  // level 50, trend 0
  REQUIRE(f.des_level() == doctest::Approx(50.0));
  REQUIRE(f.des_trend() == doctest::Approx(0.0));

  f.update(70);
  CHECK(f.des_level() == doctest::Approx(60.0));
  CHECK(f.des_trend() == doctest::Approx(5.0));

  SUBCASE("holt forecast extrapolates level + k * trend") {
    CHECK(f.forecast_values(3) == std::vector<double>{65, 70, 75});
  }
}

TEST_CASE("negative des extrapolation clamps at zero") {
  Forecaster f(ForecastMethod::des, {.des_alpha = 0.5, .des_beta = 0.5});
  // Steep decline drives the trend strongly negative.
  f.fit(std::vector<double>{100, 60, 20});
  const auto fc = f.forecast_values(4);
  for (double v : fc) CHECK(v >= 0.0);
  CHECK(fc.back() == 0.0);
}

TEST_CASE("seasonal naive repeats the values one period back") {
  Forecaster f(ForecastMethod::seasonal_naive, {.seasonal_period = 4});
  f.fit(std::vector<double>{1, 2, 3, 4});
  f.update(5);
  CHECK(f.forecast_values(4) == std::vector<double>{2, 3, 4, 5});
}

TEST_CASE("fit length minima produce fit errors that name the minimum") {
  Forecaster ar(ForecastMethod::ar_ls, {.ar_order = 3});
  CHECK_THROWS_WITH_AS(ar.fit(std::vector<double>{1, 2, 3}),
                       doctest::Contains("at least 7"), FitError);
  Forecaster des(ForecastMethod::des);
  CHECK_THROWS_AS(des.fit(std::vector<double>{1}), FitError);
  Forecaster sn(ForecastMethod::seasonal_naive, {.seasonal_period = 5});
  CHECK_THROWS_AS(sn.fit(std::vector<double>{1, 2, 3, 4}), FitError);
}

TEST_CASE("protocol and argument errors") {
  Forecaster f(ForecastMethod::persistence);
  CHECK_THROWS_AS(f.update(1.0), ProtocolError);
  CHECK_THROWS_AS((void)f.forecast_values(1), ProtocolError);
  f.fit(std::vector<double>{5});
  CHECK_THROWS_AS((void)f.forecast_values(0), std::invalid_argument);
}

TEST_CASE("every method forecasts a constant series flat, and forecasting is pure") {
  const std::vector<double> series(60, 73.0);
  for (ForecastMethod m : {ForecastMethod::persistence, ForecastMethod::seasonal_naive,
                           ForecastMethod::des, ForecastMethod::ar_ls}) {
    Forecaster f(m, {.seasonal_period = 6});
    f.fit(series);
    const auto a = f.forecast_values(8);
    const auto b = f.forecast_values(8);
    CHECK(a == b);  // side-effect free
    for (double v : a) CHECK(v == doctest::Approx(73.0).epsilon(1e-9));
  }
}

TEST_CASE("forecasts stay non-negative under random updates") {
  rng::Xoshiro256pp gen(99);
  for (ForecastMethod m : {ForecastMethod::persistence, ForecastMethod::des,
                           ForecastMethod::ar_ls}) {
    Forecaster f(m);
    std::vector<double> train;
    for (int i = 0; i < 40; ++i) train.push_back(gen.uniform(0.0, 200.0));
    f.fit(train);
    for (int i = 0; i < 200; ++i) {
      f.update(gen.uniform(0.0, 200.0));
      for (double v : f.forecast_values(5)) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
      }
    }
  }
}
