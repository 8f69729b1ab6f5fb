#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "scalesim/engine.hpp"

namespace scalesim {

struct RunMetrics {
  double sla_violation_rate = 0.0;
  double total_cost_replica_minutes = 0.0;
  double avg_replicas = 0.0;  // mean active + warming
  double avg_latency_ms = 0.0;
  std::string policy;
  std::string workload;
  std::uint64_t seed = 0;
};

// Aggregates one run's records (already restricted to the test split).
// ProtocolError on an empty record set.
RunMetrics summarize_run(std::span<const StepRecord> records);

// Diagnostic aggregate of the per-step objective over a run.
double objective_aggregate(std::span<const StepRecord> records, const MpcWeights& weights,
                           int n_max);

struct MeanCi {
  double mean = 0.0;
  std::optional<double> half_width;  // empty for fewer than 2 values
};

// Student-t 95% confidence interval: mean +/- t(0.975, n-1) * s / sqrt(n).
MeanCi mean_ci95(std::span<const double> values);

struct PairedTestResult {
  double statistic_w = 0.0;
  double p_value = 1.0;
  int n_pairs = 0;
  int n_nonzero = 0;
  bool significant_at_005 = false;
  bool degenerate_all_zero = false;
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences are
// dropped, tied magnitudes get mid-ranks, and the p-value comes from exact
// enumeration of the 2^m sign assignments for m <= 25 (normal approximation
// with continuity correction beyond that).
PairedTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// Smallest two-sided p the exact test can produce with m nonzero pairs.
double wilcoxon_min_p(int n_nonzero);

}  // namespace scalesim
