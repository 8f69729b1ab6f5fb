#include "scalesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scalesim/errors.hpp"
#include "scalesim/rng.hpp"

namespace scalesim {

namespace {
constexpr std::uint64_t kJitterStreamSalt = 0x636f6c6473746172ull;
}

std::string to_string(PolicyKind kind) {
  return kind == PolicyKind::hpa ? "hpa" : "mpc";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "hpa") return PolicyKind::hpa;
  if (name == "mpc") return PolicyKind::mpc;
  throw ConfigError("engine: unknown policy '" + name + "'");
}

double latency_of(double utilization, double base_latency_ms, double sla_ms) {
  const double cap = 3.0 * sla_ms;
  if (utilization >= 1.0) return cap;
  return std::min(base_latency_ms / (1.0 - utilization), cap);
}

bool is_sla_violated(double latency_ms, double sla_ms) {
  return latency_ms > sla_ms * (1.0 + 1e-9);
}

double jitter_factor(std::uint64_t key, std::uint64_t event_index, double fraction) {
  if (fraction <= 0.0) return 1.0;
  const double u = rng::counter_uniform01(key, event_index);
  return 1.0 - fraction + 2.0 * fraction * u;
}

const WarmingBatch& WarmingQueue::order(int count, std::size_t step,
                                        double realized_seconds, double step_seconds) {
  if (count < 1) throw std::logic_error("warming queue: order count must be >= 1");
  if (!(realized_seconds > 0.0)) {
    throw std::logic_error("warming queue: realized duration must be positive");
  }
  WarmingBatch batch;
  batch.count = count;
  batch.ordered_step = step;
  batch.realized_duration_seconds = realized_seconds;
  batch.ready_step = step + static_cast<std::size_t>(
                                std::max(1.0, std::ceil(realized_seconds / step_seconds)));
  total_ += count;
  // Insert keeping ready_step order; later orders break ties after earlier ones.
  auto it = std::upper_bound(batches_.begin(), batches_.end(), batch,
                             [](const WarmingBatch& a, const WarmingBatch& b) {
                               return a.ready_step < b.ready_step;
                             });
  return *batches_.insert(it, batch);
}

std::vector<WarmingBatch> WarmingQueue::graduate_due(std::size_t step) {
  std::vector<WarmingBatch> ready;
  auto it = batches_.begin();
  while (it != batches_.end() && it->ready_step <= step) {
    total_ -= it->count;
    ready.push_back(*it);
    it = batches_.erase(it);
  }
  return ready;
}

int WarmingQueue::cancel_newest(int count) {
  int cancelled = 0;
  while (count > 0 && !batches_.empty()) {
    // Newest = largest ordered_step.
    auto newest = batches_.begin();
    for (auto it = batches_.begin(); it != batches_.end(); ++it) {
      if (it->ordered_step >= newest->ordered_step) newest = it;
    }
    const int take = std::min(count, newest->count);
    newest->count -= take;
    total_ -= take;
    cancelled += take;
    count -= take;
    if (newest->count == 0) batches_.erase(newest);
  }
  return cancelled;
}

Simulation::Simulation(const WorkloadTrace& trace, const RunConfig& config)
    : trace_(trace), config_(config), split_(split(trace)), estimator_(config.estimator) {
  if (config_.cold_start.nominal_seconds < config_.estimator.clip_min_seconds ||
      config_.cold_start.nominal_seconds > config_.estimator.clip_max_seconds) {
    throw ConfigError("engine: nominal cold start outside the estimator clip bounds");
  }
  if (config_.cold_start.jitter_fraction < 0.0 || config_.cold_start.jitter_fraction > 0.9) {
    throw ConfigError("engine: jitter_fraction must be in [0, 0.9]");
  }
  if (config_.fixed_horizon && *config_.fixed_horizon < 1) {
    throw ConfigError("engine: fixed horizon must be >= 1");
  }
  if (config_.capacity.n_min < 1 || config_.capacity.n_min > config_.capacity.n_max ||
      config_.capacity.per_replica_rps <= 0.0) {
    throw ConfigError("engine: invalid capacity model");
  }
  if (config_.weights.gamma < 1.0) throw ConfigError("engine: gamma must be >= 1");
  if (!(config_.weights.w_sla > 0.0 || config_.weights.w_cost > 0.0 ||
        config_.weights.w_stab > 0.0)) {
    throw ConfigError("engine: at least one objective weight must be positive");
  }
  if (config_.latency.base_ms <= 0.0 || config_.latency.sla_ms <= 0.0) {
    throw ConfigError("engine: latency parameters must be positive");
  }

  if (config_.policy == PolicyKind::mpc) {
    forecaster_.emplace(config_.forecaster, config_.forecast);
    forecaster_->fit(std::span<const double>(trace_.rps.data(), split_.train_end));
    for (std::size_t t = split_.train_end; t < split_.val_end; ++t) {
      forecaster_->update(trace_.rps[t]);
    }
  }

  step_ = split_.val_end;  // test split start
  active_ = std::clamp(std::max(1, ceil_count(trace_.rps[step_] / config_.capacity.per_replica_rps)),
                       config_.capacity.n_min, config_.capacity.n_max);
  audit_.initial_active = active_;
  jitter_key_ = rng::mix64(config_.jitter_seed ^ kJitterStreamSalt);
}

void Simulation::apply_decision(int target, std::size_t now) {
  const int total = active_ + queue_.total();
  if (target < total) {
    // Scale-down is instantaneous: drop in-flight capacity first, then actives.
    int shrink = total - target;
    const int cancelled = queue_.cancel_newest(shrink);
    audit_.cancelled += cancelled;
    shrink -= cancelled;
    active_ -= shrink;
    audit_.scaled_down += shrink;
  } else if (target > total) {
    // Truncate so active + warming never exceeds n_max.
    const int want = std::min(target, config_.capacity.n_max) - total;
    if (want > 0) {
      const double factor =
          config_.cold_start.jitter_enabled
              ? jitter_factor(jitter_key_, order_events_, config_.cold_start.jitter_fraction)
              : 1.0;
      queue_.order(want, now, config_.cold_start.nominal_seconds * factor,
                   trace_.step_seconds);
      audit_.ordered += want;
      ++order_events_;
    }
  }
}

StepRecord Simulation::step() {
  if (done()) throw std::logic_error("engine: trace exhausted");
  const std::size_t t = step_;
  const double lam = trace_.rps[t];

  // 1-2: graduate due batches, feed the estimator.
  estimator_.tick();
  for (const auto& batch : queue_.graduate_due(t)) {
    active_ += batch.count;
    audit_.graduated += batch.count;
    estimator_.observe_graduation(batch.realized_duration_seconds);
  }

  // 3: metrics under the capacity that is actually serving.
  StepRecord rec;
  rec.step = t;
  rec.rps = lam;
  rec.active_replicas = active_;
  rec.warming_replicas = queue_.total();
  rec.capacity_rps = active_ * config_.capacity.per_replica_rps;
  rec.utilization = lam / rec.capacity_rps;
  rec.latency_ms = latency_of(rec.utilization, config_.latency.base_ms, config_.latency.sla_ms);
  rec.sla_violated = is_sla_violated(rec.latency_ms, config_.latency.sla_ms);
  rec.violation_fraction = lam > 0.0 ? std::max(0.0, (lam - rec.capacity_rps) / lam) : 0.0;
  rec.cost_units = (active_ + queue_.total()) * config_.cost_per_replica_step;
  rec.adapt_estimate_seconds = estimator_.estimate_seconds();

  // 4: the forecaster sees the new observation before the decision.
  if (forecaster_) forecaster_->update(lam);

  // 5: decide.
  PolicyDecision decision;
  if (config_.policy == PolicyKind::mpc) {
    const int horizon = config_.fixed_horizon
                            ? *config_.fixed_horizon
                            : derive_horizon(estimator_.estimate_seconds(),
                                             {trace_.step_seconds, config_.horizon_buffer_steps});
    const auto forecast = forecaster_->forecast_values(static_cast<std::size_t>(horizon));
    decision = mpc_decide(lam, active_, forecast, horizon, config_.capacity, config_.weights);
  } else {
    decision = hpa_decide(lam, active_, config_.capacity, config_.hpa);
  }
  rec.n_reactive = decision.reactive_floor;
  rec.n_pro = decision.proactive_target;
  rec.target_replicas = decision.target_replicas;
  rec.horizon = decision.horizon_used;

  // 6: apply, then audit the replica ledger.
  apply_decision(decision.target_replicas, t);
  const long long delta = static_cast<long long>(active_) + queue_.total() - audit_.initial_active;
  if (delta != audit_.ordered - audit_.cancelled - audit_.scaled_down) {
    throw std::logic_error("engine: replica conservation violated");
  }

  ++step_;
  return rec;
}

std::vector<StepRecord> Simulation::run_all() {
  std::vector<StepRecord> records;
  records.reserve(split_.test_end - split_.val_end);
  while (!done()) records.push_back(step());
  return records;
}

std::vector<StepRecord> run(const WorkloadTrace& trace, const RunConfig& config) {
  Simulation sim(trace, config);
  return sim.run_all();
}

}  // namespace scalesim
