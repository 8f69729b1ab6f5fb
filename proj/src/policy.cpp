#include "scalesim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scalesim/errors.hpp"

namespace scalesim {

int ceil_count(double x) {
  if (x <= 0.0) return 0;
  const double snapped = x - 1e-9 * std::max(1.0, std::fabs(x));
  return static_cast<int>(std::ceil(snapped));
}

PolicyDecision hpa_decide(double current_rps, int active_replicas,
                          const CapacityModel& capacity, const HpaParams& params) {
  const double utilization = current_rps / (active_replicas * capacity.per_replica_rps);
  const double ratio = utilization / params.target_utilization;

  int desired;
  if (std::fabs(ratio - 1.0) <= params.tolerance) {
    desired = active_replicas;  // inside the dead-band
  } else {
    desired = ceil_count(active_replicas * ratio);
  }
  desired = std::clamp(desired, capacity.n_min, capacity.n_max);

  PolicyDecision d;
  d.target_replicas = desired;
  d.reactive_floor = std::clamp(std::max(1, ceil_count(current_rps / capacity.per_replica_rps)),
                                capacity.n_min, capacity.n_max);
  d.proactive_target = desired;
  d.best_candidate_cost = 0.0;
  d.horizon_used = 1;
  return d;
}

PolicyDecision mpc_decide(double current_rps, int active_replicas,
                          std::span<const double> forecast, int horizon,
                          const CapacityModel& capacity, const MpcWeights& weights) {
  if (horizon < 1) throw ProtocolError("policy: horizon must be >= 1");
  if (forecast.size() < static_cast<std::size_t>(horizon)) {
    throw ProtocolError("policy: forecast shorter than the planning horizon");
  }

  const double c = capacity.per_replica_rps;
  const int n_reactive = std::max(1, ceil_count(current_rps / c));

  double forecast_peak = 0.0;
  for (int k = 0; k < horizon; ++k) {
    forecast_peak = std::max(forecast_peak, forecast[static_cast<std::size_t>(k)]);
  }
  const int n_pro = std::max(1, ceil_count(weights.gamma * forecast_peak / c));

  int target = std::max(n_reactive, n_pro);

  // Sweep every candidate; an improving candidate can only raise the target.
  double best = std::numeric_limits<double>::infinity();
  for (int r = capacity.n_min; r <= capacity.n_max; ++r) {
    const double u = current_rps / (r * c);
    const double over = std::max(0.0, u - 1.0);
    const double j = weights.w_sla * over * over +
                     weights.w_cost * static_cast<double>(r) / capacity.n_max +
                     weights.w_stab * std::abs(r - active_replicas) /
                         static_cast<double>(capacity.n_max);
    if (j < best) {
      best = j;
      target = std::max(target, r);
    }
  }

  PolicyDecision d;
  d.target_replicas = std::clamp(target, capacity.n_min, capacity.n_max);
  d.reactive_floor = std::clamp(n_reactive, capacity.n_min, capacity.n_max);
  d.proactive_target = std::clamp(n_pro, capacity.n_min, capacity.n_max);
  d.best_candidate_cost = best;
  d.horizon_used = horizon;
  return d;
}

double objective_step_cost(double violation_fraction, int replicas, int prev_replicas,
                           int n_max, const MpcWeights& weights) {
  return weights.w_sla * violation_fraction +
         weights.w_cost * static_cast<double>(replicas) / n_max +
         weights.w_stab * std::abs(replicas - prev_replicas);
}

}  // namespace scalesim
