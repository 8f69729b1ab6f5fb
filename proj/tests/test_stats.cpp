#include <cmath>
#include <vector>

#include "doctest.h"
#include "scalesim/errors.hpp"
#include "scalesim/rng.hpp"
#include "scalesim/stats.hpp"

using namespace scalesim;

namespace {

std::vector<StepRecord> synthetic_records(std::size_t n, std::size_t violated,
                                          int replicas, double latency) {
  std::vector<StepRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].step = i;
    records[i].sla_violated = i < violated;
    records[i].active_replicas = replicas;
    records[i].warming_replicas = 0;
    records[i].latency_ms = latency;
    records[i].cost_units = replicas;
  }
  return records;
}

}  // namespace

TEST_CASE("run summaries match hand-computed metrics") {
  const auto records = synthetic_records(100, 5, 3, 200.0);
  const auto m = summarize_run(records);
  CHECK(m.sla_violation_rate == doctest::Approx(0.05));
  CHECK(m.total_cost_replica_minutes == doctest::Approx(300.0));
  CHECK(m.avg_replicas == doctest::Approx(3.0));
  CHECK(m.avg_latency_ms == doctest::Approx(200.0));

  CHECK_THROWS_AS(summarize_run(std::vector<StepRecord>{}), ProtocolError);
}

TEST_CASE("confidence intervals") {
  const std::vector<double> flat{10, 10, 10, 10, 10};
  const auto a = mean_ci95(flat);
  CHECK(a.mean == doctest::Approx(10.0));
  REQUIRE(a.half_width.has_value());
  CHECK(*a.half_width == doctest::Approx(0.0));

  const std::vector<double> ramp{1, 2, 3, 4, 5};
  const auto b = mean_ci95(ramp);
  CHECK(b.mean == doctest::Approx(3.0));
  // t(0.975, 4) = 2.776, s = sqrt(2.5)
  CHECK(*b.half_width == doctest::Approx(2.776 * std::sqrt(2.5) / std::sqrt(5.0)).epsilon(1e-3));
  CHECK(*b.half_width == doctest::Approx(1.963).epsilon(1e-3));

  const std::vector<double> single{7};
  const auto c = mean_ci95(single);
  CHECK(c.mean == doctest::Approx(7.0));
  CHECK_FALSE(c.half_width.has_value());
}

TEST_CASE("wilcoxon on five one-sided differences") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{0, 0, 0, 0, 0};
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK(r.statistic_w == doctest::Approx(0.0));
  CHECK(r.p_value == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(r.n_nonzero == 5);
  CHECK_FALSE(r.significant_at_005);
}

TEST_CASE("wilcoxon degenerates to p = 1 when every pair ties") {
  const std::vector<double> a{3, 3, 3};
  const auto r = wilcoxon_signed_rank(a, a);
  CHECK(r.degenerate_all_zero);
  CHECK(r.p_value == doctest::Approx(1.0));
  CHECK(r.n_nonzero == 0);
}

TEST_CASE("wilcoxon handles tied magnitudes with mid-ranks") {
  const std::vector<double> a{1, 0};
  const std::vector<double> b{0, 1};  // d = [+1, -1], ranks {1.5, 1.5}
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK(r.statistic_w == doctest::Approx(1.5));
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("wilcoxon is symmetric in its arguments") {
  rng::Xoshiro256pp gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 8; ++i) {
      a.push_back(gen.uniform(0, 1));
      b.push_back(gen.uniform(0, 1));
    }
    const auto ab = wilcoxon_signed_rank(a, b);
    const auto ba = wilcoxon_signed_rank(b, a);
    CHECK(ab.statistic_w == doctest::Approx(ba.statistic_w));
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
  }
}

TEST_CASE("exact p-values are dyadic when magnitudes are distinct") {
  rng::Xoshiro256pp gen(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(7, 0.0), b(7, 0.0);
    for (int i = 0; i < 7; ++i) a[i] = gen.uniform(0.1, 10.0) * (i + 1);  // distinct |d|
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
    const double scaled = r.p_value * std::pow(2.0, r.n_nonzero);
    CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-9));
  }
}

TEST_CASE("minimum attainable p blocks significance at five pairs") {
  CHECK(wilcoxon_min_p(5) == doctest::Approx(0.0625));
  CHECK(wilcoxon_min_p(5) > 0.05);
  CHECK(wilcoxon_min_p(6) < 0.05);
}

TEST_CASE("mismatched or too-short inputs are protocol errors") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 2};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), ProtocolError);
  const std::vector<double> one{1};
  CHECK_THROWS_AS(wilcoxon_signed_rank(one, one), ProtocolError);
}

TEST_CASE("objective aggregate sums the per-step diagnostic") {
  auto records = synthetic_records(3, 0, 5, 100.0);
  records[2].active_replicas = 7;  // one change of +2
  const MpcWeights w{100, 1, 1, 1.1};
  // steps: 5 (0.1), 5 (0.1), 7 (0.14 + 2)
  CHECK(objective_aggregate(records, w, 50) == doctest::Approx(0.1 + 0.1 + 0.14 + 2.0));
}
