#include <cmath>
#include <vector>

#include "doctest.h"
#include "scalesim/errors.hpp"
#include "scalesim/estimator.hpp"
#include "scalesim/rng.hpp"

using namespace scalesim;

TEST_CASE("ewma update with default alpha") {
  ColdStartEstimator est({.alpha = 0.3, .prior_seconds = 120});
  CHECK(est.observe_graduation(180));
  CHECK(est.estimate_seconds() == doctest::Approx(138.0).epsilon(1e-12));

  SUBCASE("observing the current estimate is a fixed point") {
    ColdStartEstimator fp({.alpha = 0.3, .prior_seconds = 120});
    fp.observe_graduation(120);
    CHECK(fp.estimate_seconds() == doctest::Approx(120.0).epsilon(1e-12));
  }
}

TEST_CASE("observations are clipped before the ewma and the welford update") {
  ColdStartEstimator est({.alpha = 0.3, .prior_seconds = 120,
                          .clip_min_seconds = 5, .clip_max_seconds = 600});
  est.observe_graduation(10000.0);
  CHECK(est.estimate_seconds() == doctest::Approx(0.3 * 600 + 0.7 * 120).epsilon(1e-12));
  CHECK(est.mean_seconds() == doctest::Approx(600.0));

  est.observe_graduation(1e-9);  // positive but tiny: clips to the lower bound
  CHECK(est.mean_seconds() == doctest::Approx((600.0 + 5.0) / 2.0));
}

TEST_CASE("welford variance matches the textbook examples") {
  ColdStartEstimator est;
  CHECK_FALSE(est.variance().has_value());

  est.observe_graduation(100);
  CHECK_FALSE(est.variance().has_value());  // single observation

  est.observe_graduation(140);
  REQUIRE(est.variance().has_value());
  CHECK(*est.variance() == doctest::Approx(800.0).epsilon(1e-12));

  ColdStartEstimator flat;
  for (int i = 0; i < 3; ++i) flat.observe_graduation(120);
  CHECK(*flat.variance() == doctest::Approx(0.0));
}

TEST_CASE("summary reports the full estimator state") {
  ColdStartEstimator est({.alpha = 0.3, .prior_seconds = 120,
                          .clip_min_seconds = 5, .clip_max_seconds = 600});
  auto fresh = est.summary();
  CHECK(fresh.estimate_seconds == doctest::Approx(120.0));
  CHECK(fresh.count == 0);
  CHECK(fresh.mean_seconds == doctest::Approx(0.0));
  CHECK_FALSE(fresh.variance_seconds2.has_value());
  CHECK(fresh.clip_min_seconds == doctest::Approx(5.0));
  CHECK(fresh.clip_max_seconds == doctest::Approx(600.0));
  CHECK(fresh.alpha == doctest::Approx(0.3));

  est.observe_graduation(90);
  auto one = est.summary();
  CHECK(one.count == 1);
  CHECK(one.mean_seconds == doctest::Approx(90.0));

  est.observe_graduation(100);
  est.observe_graduation(140);
  auto s = est.summary();
  CHECK(s.count == 3);

  est.tick();
  est.tick();
  CHECK(est.summary().steps_since_last_observation == 2);
  est.observe_graduation(100);
  CHECK(est.summary().steps_since_last_observation == 0);
}

TEST_CASE("invalid observations are rejected without touching the state") {
  ColdStartEstimator est;
  const double before = est.estimate_seconds();
  CHECK_FALSE(est.observe_graduation(-5.0));
  CHECK_FALSE(est.observe_graduation(0.0));
  CHECK_FALSE(est.observe_graduation(std::nan("")));
  CHECK_FALSE(est.observe_graduation(std::numeric_limits<double>::infinity()));
  CHECK(est.estimate_seconds() == before);
  CHECK(est.observation_count() == 0);
  CHECK(est.summary().rejected == 4);
}

TEST_CASE("estimator parameter validation") {
  CHECK_THROWS_AS(ColdStartEstimator({.alpha = 1.0}), ConfigError);
  CHECK_THROWS_AS(ColdStartEstimator({.alpha = 0.3, .clip_min_seconds = 10,
                                      .clip_max_seconds = 5}),
                  ConfigError);
  CHECK_THROWS_AS(ColdStartEstimator({.alpha = 0.3, .prior_seconds = 1000}), ConfigError);
}

TEST_CASE("ewma contracts geometrically toward constant observations") {
  ColdStartEstimator est({.alpha = 0.3, .prior_seconds = 120});
  double expected_error = 60.0;
  for (int k = 1; k <= 20; ++k) {
    est.observe_graduation(180.0);
    expected_error *= 0.7;
    CHECK(std::fabs(180.0 - est.estimate_seconds() - expected_error) < 1e-9);
  }
}

TEST_CASE("welford matches a two-pass computation on random sequences") {
  rng::Xoshiro256pp gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    ColdStartEstimator est({.alpha = 0.5, .prior_seconds = 100,
                            .clip_min_seconds = 1, .clip_max_seconds = 1e6});
    std::vector<double> values;
    const int n = 2 + static_cast<int>(gen.uniform(0, 48));
    for (int i = 0; i < n; ++i) {
      const double v = gen.uniform(1.0, 500.0);
      values.push_back(v);
      est.observe_graduation(v);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / (values.size() - 1);

    CHECK(est.mean_seconds() == doctest::Approx(mean).epsilon(1e-9));
    CHECK(*est.variance() == doctest::Approx(var).epsilon(1e-9));
  }
}

TEST_CASE("the estimate never leaves the clip bounds") {
  rng::Xoshiro256pp gen(7);
  ColdStartEstimator est({.alpha = 0.3, .prior_seconds = 120,
                          .clip_min_seconds = 5, .clip_max_seconds = 600});
  for (int i = 0; i < 5000; ++i) {
    est.observe_graduation(std::exp(gen.uniform(-5.0, 12.0)));
    CHECK(est.estimate_seconds() >= 5.0);
    CHECK(est.estimate_seconds() <= 600.0);
  }
}

TEST_CASE("horizon derivation") {
  CHECK(derive_horizon(120, {60, 1}) == 3);
  CHECK(derive_horizon(30, {60, 1}) == 2);
  CHECK(derive_horizon(10, {60, 0}) == 1);
  CHECK(derive_horizon(300, {60, 1}) == 6);

  SUBCASE("monotone in the estimate and the buffer, and covers the window") {
    HorizonParams params{60, 1};
    int prev = 0;
    for (double est = 1; est < 800; est += 7) {
      const int h = derive_horizon(est, params);
      CHECK(h >= prev);
      CHECK(h >= static_cast<int>(std::ceil(est / params.step_seconds)));
      CHECK(derive_horizon(est, {60, 2}) >= h);
      prev = h;
    }
  }
}

TEST_CASE("horizon slack classifies late, on-time and early") {
  CHECK(horizon_slack(2, 3) == -1);
  CHECK(horizon_slack(3, 3) == 0);
  CHECK(horizon_slack(4, 2) == 2);
}
