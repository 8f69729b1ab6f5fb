#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace scalesim {

enum class Archetype {
  smooth,
  bursty,
  bimodal,
  diurnal_burst,
  flash_crowd,
  slow_ramp,
};

const std::vector<Archetype>& all_archetypes();
std::string to_string(Archetype archetype);
Archetype archetype_from_string(const std::string& name);  // ConfigError on unknown names

// Generator parameters for all six archetypes. Window positions are expressed
// as fractions of the trace length so shorter traces keep their shape.
struct TraceParams {
  double base_rps = 100.0;

  // smooth: sinusoid plus additive Gaussian noise
  double smooth_period_steps = 200.0;
  double smooth_amplitude_rps = 40.0;
  double smooth_noise_sigma = 4.0;

  // bursty: Poisson arrivals with periodic multiplicative spikes
  double bursty_spike_period_steps = 50.0;
  double bursty_spike_period_jitter = 5.0;
  double bursty_spike_len_steps = 4.0;
  double bursty_spike_factor_min = 2.0;
  double bursty_spike_factor_max = 3.0;

  // bimodal: two exact levels with seeded geometric holding times
  double bimodal_low_rps = 80.0;
  double bimodal_high_rps = 240.0;
  double bimodal_mean_hold_steps = 40.0;

  // diurnal_burst: one daily cycle with intraday ripple and a sharp peak window
  double diurnal_period_steps = 480.0;
  double diurnal_amplitude_frac = 0.25;
  double diurnal_phase_steps = 100.0;
  double diurnal_ripple_frac = 0.08;
  double diurnal_ripple_period_steps = 40.0;
  double diurnal_peak_factor = 2.5;
  double diurnal_peak_start_frac = 0.856;
  double diurnal_peak_len_steps = 30.0;
  double diurnal_peak_ramp_steps = 5.0;
  double diurnal_noise_sigma = 1.0;

  // flash_crowd: oscillating baseline, one contiguous spike window at 3x base
  double flash_factor = 3.0;
  double flash_start_frac = 0.85;
  double flash_window_steps = 20.0;
  double flash_ramp_steps = 4.0;
  double flash_osc_frac = 0.08;
  double flash_osc_period_steps = 50.0;
  double flash_noise_sigma = 1.0;

  // slow_ramp: linear increase plus small noise
  double ramp_start_rps = 50.0;
  double ramp_end_rps = 400.0;
  double ramp_noise_sigma = 2.0;
};

struct WorkloadTrace {
  Archetype archetype = Archetype::smooth;
  std::uint64_t seed = 0;
  double step_seconds = 60.0;
  std::vector<double> rps;

  std::size_t size() const { return rps.size(); }
};

struct SplitIndices {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t test_end = 0;
};

// Deterministic in all arguments; regenerating with the same inputs yields a
// bit-identical sequence. Values are clamped at zero after noise.
WorkloadTrace generate(Archetype archetype, std::uint64_t seed,
                       std::size_t num_steps, const TraceParams& params = {},
                       double step_seconds = 60.0);

// 70/10/20 split (floor for train and validation, remainder to test).
// ConfigError for traces shorter than 10 steps.
SplitIndices split(const WorkloadTrace& trace);

void write_trace_csv(const WorkloadTrace& trace, std::ostream& out);
std::vector<double> read_trace_csv(std::istream& in);

}  // namespace scalesim
