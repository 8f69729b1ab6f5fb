#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "scalesim/errors.hpp"
#include "scalesim/trace.hpp"

using namespace scalesim;

namespace {
const std::vector<std::uint64_t> kSeeds = {42, 123, 456, 789, 1337};
}

TEST_CASE("flash crowd spike lands between 2.8x and 3.2x the pre-spike baseline") {
  TraceParams params;
  params.flash_factor = 3.0;
  const auto trace = generate(Archetype::flash_crowd, 42, 500, params);

  const auto spike_begin = static_cast<std::size_t>(params.flash_start_frac * 500.0);
  const double baseline =
      std::accumulate(trace.rps.begin(), trace.rps.begin() + spike_begin, 0.0) /
      static_cast<double>(spike_begin);
  const double peak = *std::max_element(trace.rps.begin(), trace.rps.end());

  CHECK(peak >= 2.8 * baseline);
  CHECK(peak <= 3.2 * baseline);
}

TEST_CASE("slow ramp with zero noise is non-decreasing") {
  TraceParams params;
  params.ramp_noise_sigma = 0.0;
  for (std::uint64_t seed : kSeeds) {
    const auto trace = generate(Archetype::slow_ramp, seed, 500, params);
    CHECK(std::is_sorted(trace.rps.begin(), trace.rps.end()));
  }
}

TEST_CASE("smooth with zero amplitude and zero noise is constant at base") {
  TraceParams params;
  params.smooth_amplitude_rps = 0.0;
  params.smooth_noise_sigma = 0.0;
  const auto trace = generate(Archetype::smooth, 42, 500, params);
  for (double v : trace.rps) CHECK(v == doctest::Approx(params.base_rps).epsilon(1e-12));
}

TEST_CASE("generation is deterministic and non-negative") {
  for (Archetype archetype : all_archetypes()) {
    const auto a = generate(archetype, 123, 300);
    const auto b = generate(archetype, 123, 300);
    CHECK(a.rps == b.rps);  // bit-identical
    for (double v : a.rps) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
    CHECK(a.rps.size() == 300);
  }
}

TEST_CASE("distinct seeds give pairwise distinct traces for every archetype") {
  for (Archetype archetype : all_archetypes()) {
    std::vector<std::vector<double>> traces;
    for (std::uint64_t seed : kSeeds) {
      traces.push_back(generate(archetype, seed, 500).rps);
    }
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (std::size_t j = i + 1; j < traces.size(); ++j) {
        CHECK(traces[i] != traces[j]);
      }
    }
  }
}

TEST_CASE("bad generate inputs are configuration errors") {
  CHECK_THROWS_AS(generate(Archetype::smooth, 1, 0), ConfigError);
  CHECK_THROWS_AS(archetype_from_string("tsunami"), ConfigError);
  TraceParams bad;
  bad.smooth_noise_sigma = -1.0;
  CHECK_THROWS_AS(generate(Archetype::smooth, 1, 100, bad), ConfigError);
}

TEST_CASE("split is 70/10/20 with floor semantics") {
  auto make = [](std::size_t n) {
    WorkloadTrace t;
    t.rps.assign(n, 1.0);
    return t;
  };
  const auto s500 = split(make(500));
  CHECK(s500.train_end == 350);
  CHECK(s500.val_end == 400);
  CHECK(s500.test_end == 500);

  const auto s10 = split(make(10));
  CHECK(s10.train_end == 7);
  CHECK(s10.val_end == 8);
  CHECK(s10.test_end == 10);

  CHECK_THROWS_AS(split(make(9)), ConfigError);
}

TEST_CASE("trace csv round-trips through the documented header") {
  const auto trace = generate(Archetype::bimodal, 7, 50);
  std::stringstream buffer;
  write_trace_csv(trace, buffer);
  CHECK(buffer.str().rfind("step,rps\n", 0) == 0);

  const auto back = read_trace_csv(buffer);
  REQUIRE(back.size() == trace.rps.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i] == doctest::Approx(trace.rps[i]).epsilon(1e-9));
  }

  std::stringstream bad("nope\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ConfigError);
}
