#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scalesim/estimator.hpp"
#include "scalesim/forecast.hpp"
#include "scalesim/policy.hpp"
#include "scalesim/trace.hpp"

namespace scalesim {

enum class PolicyKind { hpa, mpc };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct ColdStartConfig {
  double nominal_seconds = 120.0;
  double jitter_fraction = 0.3;  // multiplicative, U[1-j, 1+j] per scale-up event
  bool jitter_enabled = true;
};

struct LatencyParams {
  double base_ms = 100.0;
  double sla_ms = 500.0;
};

// An in-flight scale-up order.
struct WarmingBatch {
  int count = 0;
  std::size_t ordered_step = 0;
  double realized_duration_seconds = 0.0;
  std::size_t ready_step = 0;
};

struct StepRecord {
  std::size_t step = 0;
  double rps = 0.0;
  int active_replicas = 0;
  int warming_replicas = 0;
  double capacity_rps = 0.0;
  double utilization = 0.0;
  double latency_ms = 0.0;
  bool sla_violated = false;
  double violation_fraction = 0.0;
  double cost_units = 0.0;
  int n_reactive = 0;
  int n_pro = 0;
  int target_replicas = 0;
  int horizon = 1;
  double adapt_estimate_seconds = 0.0;
};

// M/M/1-style latency: base/(1-u) for u < 1, capped at 3*sla (and exactly
// 3*sla for u >= 1).
double latency_of(double utilization, double base_latency_ms, double sla_ms);

// Strictly greater than the SLA bound, with a relative guard so utilizations
// that sit algebraically on the boundary (e.g. u = 4/5 with base 100, SLA 500)
// do not flip on the last bit of rounding.
bool is_sla_violated(double latency_ms, double sla_ms);

// Multiplicative boot-time jitter in [1 - fraction, 1 + fraction], drawn from
// a counter-mode stream so the k-th scale-up event of a run gets the same
// draw no matter when it happens.
double jitter_factor(std::uint64_t key, std::uint64_t event_index, double fraction);

// FIFO-by-readiness queue of warming batches.
class WarmingQueue {
 public:
  const WarmingBatch& order(int count, std::size_t step, double realized_seconds,
                            double step_seconds);
  // Pops every batch with ready_step <= step, in ready order.
  std::vector<WarmingBatch> graduate_due(std::size_t step);
  // Cancels up to `count` replicas, newest order first; returns how many.
  int cancel_newest(int count);
  int total() const { return total_; }
  bool empty() const { return batches_.empty(); }

 private:
  std::vector<WarmingBatch> batches_;  // sorted by ready_step
  int total_ = 0;
};

struct RunConfig {
  PolicyKind policy = PolicyKind::mpc;
  ForecastMethod forecaster = ForecastMethod::ar_ls;
  CapacityModel capacity;
  MpcWeights weights;
  HpaParams hpa;
  EstimatorParams estimator;
  int horizon_buffer_steps = 1;
  ColdStartConfig cold_start;
  LatencyParams latency;
  ForecastParams forecast;
  double cost_per_replica_step = 1.0;     // replica-minutes per step at tau = 60 s
  std::optional<int> fixed_horizon;       // overrides the derived horizon when set
  std::uint64_t jitter_seed = 0;          // keys the per-event jitter stream
};

// Replica ledger kept by the simulation; checked after every step.
struct ReplicaAudit {
  long long ordered = 0;
  long long graduated = 0;
  long long cancelled = 0;
  long long scaled_down = 0;
  int initial_active = 0;
};

// One deterministic run over the test split of a trace. The forecaster is fit
// on the train split, advanced through validation online, and the simulation
// itself covers test steps only.
class Simulation {
 public:
  Simulation(const WorkloadTrace& trace, const RunConfig& config);

  bool done() const { return step_ >= split_.test_end; }
  StepRecord step();  // advances one step; std::logic_error when done
  std::vector<StepRecord> run_all();

  const ColdStartEstimator& estimator() const { return estimator_; }
  const ReplicaAudit& audit() const { return audit_; }
  int active_replicas() const { return active_; }
  int warming_replicas() const { return queue_.total(); }

 private:
  void apply_decision(int target, std::size_t now);

  const WorkloadTrace& trace_;
  RunConfig config_;
  SplitIndices split_;
  ColdStartEstimator estimator_;
  std::optional<Forecaster> forecaster_;  // absent for the reactive policy
  WarmingQueue queue_;
  ReplicaAudit audit_;
  std::size_t step_ = 0;
  int active_ = 1;
  std::uint64_t jitter_key_ = 0;
  std::uint64_t order_events_ = 0;
};

// Convenience wrapper: construct, run to completion, return the records.
std::vector<StepRecord> run(const WorkloadTrace& trace, const RunConfig& config);

}  // namespace scalesim
