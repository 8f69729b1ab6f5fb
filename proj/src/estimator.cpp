#include "scalesim/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "scalesim/errors.hpp"

namespace scalesim {

ColdStartEstimator::ColdStartEstimator(const EstimatorParams& params)
    : params_(params), estimate_(params.prior_seconds) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw ConfigError("estimator: alpha must be in (0, 1)");
  }
  if (!(params.clip_min_seconds > 0.0 && params.clip_min_seconds < params.clip_max_seconds)) {
    throw ConfigError("estimator: clip bounds must satisfy 0 < min < max");
  }
  if (params.prior_seconds < params.clip_min_seconds ||
      params.prior_seconds > params.clip_max_seconds) {
    throw ConfigError("estimator: prior must lie inside the clip bounds");
  }
}

bool ColdStartEstimator::observe_graduation(double observed_seconds) {
  if (!std::isfinite(observed_seconds) || observed_seconds <= 0.0) {
    ++rejected_;
    return false;
  }
  const double clipped = std::clamp(observed_seconds, params_.clip_min_seconds,
                                    params_.clip_max_seconds);
  estimate_ = params_.alpha * clipped + (1.0 - params_.alpha) * estimate_;

  ++count_;
  const double delta = clipped - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (clipped - mean_);

  steps_since_obs_ = 0;
  return true;
}

std::optional<double> ColdStartEstimator::variance() const {
  if (count_ < 2) return std::nullopt;
  return m2_ / static_cast<double>(count_ - 1);
}

EstimatorSummary ColdStartEstimator::summary() const {
  EstimatorSummary s;
  s.estimate_seconds = estimate_;
  s.count = count_;
  s.mean_seconds = mean_;
  s.variance_seconds2 = variance();
  s.clip_min_seconds = params_.clip_min_seconds;
  s.clip_max_seconds = params_.clip_max_seconds;
  s.alpha = params_.alpha;
  s.rejected = rejected_;
  s.steps_since_last_observation = steps_since_obs_;
  return s;
}

int derive_horizon(double estimate_seconds, const HorizonParams& params) {
  const int steps = static_cast<int>(std::ceil(estimate_seconds / params.step_seconds));
  return std::max(1, steps + params.buffer_steps);
}

int horizon_slack(int fixed_horizon, int realized_horizon_steps) {
  return fixed_horizon - realized_horizon_steps;
}

}  // namespace scalesim
