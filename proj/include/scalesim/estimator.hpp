#pragma once

#include <cstdint>
#include <optional>

namespace scalesim {

struct EstimatorParams {
  double alpha = 0.3;             // EWMA smoothing factor, in (0, 1)
  double prior_seconds = 120.0;   // estimate before the first graduation
  double clip_min_seconds = 5.0;
  double clip_max_seconds = 600.0;
};

struct EstimatorSummary {
  double estimate_seconds = 0.0;
  std::uint64_t count = 0;
  double mean_seconds = 0.0;
  std::optional<double> variance_seconds2;  // empty while count < 2
  double clip_min_seconds = 0.0;
  double clip_max_seconds = 0.0;
  double alpha = 0.0;
  std::uint64_t rejected = 0;
  std::uint64_t steps_since_last_observation = 0;
};

// Online cold-start duration estimator: graduation observations are clipped
// to [clip_min, clip_max], folded into an EWMA, and accumulated in Welford
// mean/variance form. All updates are O(1).
class ColdStartEstimator {
 public:
  ColdStartEstimator() : ColdStartEstimator(EstimatorParams{}) {}
  explicit ColdStartEstimator(const EstimatorParams& params);  // ConfigError on bad params

  // Returns false (and leaves the state untouched, apart from a rejected
  // counter) for non-finite or non-positive observations.
  bool observe_graduation(double observed_seconds);

  double estimate_seconds() const { return estimate_; }
  std::uint64_t observation_count() const { return count_; }
  double mean_seconds() const { return mean_; }
  std::optional<double> variance() const;
  EstimatorSummary summary() const;

  // Advances the staleness counter; the simulator calls this once per step.
  void tick() { ++steps_since_obs_; }

 private:
  EstimatorParams params_;
  double estimate_;
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::uint64_t rejected_ = 0;
  std::uint64_t steps_since_obs_ = 0;
};

struct HorizonParams {
  double step_seconds = 60.0;  // decision timestep
  int buffer_steps = 1;        // safety buffer added to the derived horizon
};

// Planning horizon from the live estimate: max(1, ceil(estimate/step) + buffer).
int derive_horizon(double estimate_seconds, const HorizonParams& params);

// fixed_horizon - realized horizon; negative means capacity arrived late,
// zero on time, positive early.
int horizon_slack(int fixed_horizon, int realized_horizon_steps);

}  // namespace scalesim
