#pragma once

#include <span>

namespace scalesim {

struct CapacityModel {
  double per_replica_rps = 100.0;
  int n_min = 1;
  int n_max = 50;
};

struct MpcWeights {
  double w_sla = 100.0;
  double w_cost = 1.0;
  double w_stab = 1.0;
  double gamma = 1.1;  // forecast margin, >= 1
};

struct HpaParams {
  double target_utilization = 0.7;
  double tolerance = 0.1;  // dead-band half width on the utilization ratio
};

struct PolicyDecision {
  int target_replicas = 1;
  int reactive_floor = 1;
  int proactive_target = 1;
  double best_candidate_cost = 0.0;
  int horizon_used = 1;
};

// ceil() for replica counts with a relative snap that absorbs float rounding,
// so an algebraically integral ratio (e.g. 2 * 1.5) never rounds up twice.
int ceil_count(double x);

// Kubernetes-style proportional rule: scale active replicas by the ratio of
// observed utilization to the target, with a dead-band around the target.
PolicyDecision hpa_decide(double current_rps, int active_replicas,
                          const CapacityModel& capacity, const HpaParams& params);

// Candidate-sweep controller floored by the reactive demand and by the
// margin-inflated forecast peak inside the planning horizon.
// ProtocolError when the forecast is shorter than the horizon.
PolicyDecision mpc_decide(double current_rps, int active_replicas,
                          std::span<const double> forecast, int horizon,
                          const CapacityModel& capacity, const MpcWeights& weights);

// Per-step diagnostic penalty: w_sla*v + w_cost*n/n_max + w_stab*|n - n_prev|.
double objective_step_cost(double violation_fraction, int replicas, int prev_replicas,
                           int n_max, const MpcWeights& weights);

}  // namespace scalesim
