#include "scalesim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "scalesim/errors.hpp"
#include "scalesim/rng.hpp"

namespace scalesim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

rng::Xoshiro256pp make_generator(Archetype archetype, std::uint64_t seed) {
  // Fold the archetype into the seed so the same seed yields unrelated
  // streams across archetypes.
  const auto salt = static_cast<std::uint64_t>(archetype) + 1;
  return rng::Xoshiro256pp(rng::mix64(seed ^ rng::mix64(salt * 0x9E3779B97F4A7C15ull)));
}

double clamp0(double v) { return v < 0.0 ? 0.0 : v; }

// Linear shoulder weight for a window [start, start+ramp+len+ramp):
// ramps 0 -> 1 over `ramp` steps, holds at 1 for `len` steps, ramps back down.
double window_weight(std::size_t t, std::size_t start, std::size_t ramp, std::size_t len) {
  if (t < start) return 0.0;
  const std::size_t rel = t - start;
  if (rel < ramp) return static_cast<double>(rel + 1) / static_cast<double>(ramp + 1);
  if (rel < ramp + len) return 1.0;
  if (rel < ramp + len + ramp) {
    const std::size_t down = rel - ramp - len;
    return 1.0 - static_cast<double>(down + 1) / static_cast<double>(ramp + 1);
  }
  return 0.0;
}

void generate_smooth(std::vector<double>& out, const TraceParams& p, rng::Xoshiro256pp& gen) {
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double wave = p.smooth_amplitude_rps *
                        std::sin(kTwoPi * static_cast<double>(t) / p.smooth_period_steps);
    out[t] = clamp0(p.base_rps + wave + gen.gaussian(0.0, p.smooth_noise_sigma));
  }
}

void generate_bursty(std::vector<double>& out, const TraceParams& p, rng::Xoshiro256pp& gen) {
  // Spike schedule first so the per-step Poisson draws stay aligned.
  struct Spike {
    std::size_t start;
    double factor;
  };
  std::vector<Spike> spikes;
  double cursor = p.bursty_spike_period_steps / 2.0;
  while (cursor < static_cast<double>(out.size())) {
    const double jitter = gen.uniform(-p.bursty_spike_period_jitter, p.bursty_spike_period_jitter);
    const auto start = static_cast<std::size_t>(std::max(0.0, cursor + jitter));
    spikes.push_back({start, gen.uniform(p.bursty_spike_factor_min, p.bursty_spike_factor_max)});
    cursor += p.bursty_spike_period_steps;
  }

  const auto len = static_cast<std::size_t>(p.bursty_spike_len_steps);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double rate = p.base_rps;
    for (const auto& s : spikes) {
      if (t >= s.start && t < s.start + len) rate = p.base_rps * s.factor;
    }
    out[t] = static_cast<double>(gen.poisson(rate));
  }
}

void generate_bimodal(std::vector<double>& out, const TraceParams& p, rng::Xoshiro256pp& gen) {
  const double switch_prob = 1.0 / p.bimodal_mean_hold_steps;
  bool high = false;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (gen.uniform01() < switch_prob) high = !high;
    out[t] = high ? p.bimodal_high_rps : p.bimodal_low_rps;
  }
}

void generate_diurnal_burst(std::vector<double>& out, const TraceParams& p, rng::Xoshiro256pp& gen) {
  const double phase_jitter = gen.uniform(0.0, 8.0);
  const double start_jitter = gen.uniform(0.0, 8.0);
  const auto peak_start = static_cast<std::size_t>(
      p.diurnal_peak_start_frac * static_cast<double>(out.size()) + start_jitter);
  const auto ramp = static_cast<std::size_t>(p.diurnal_peak_ramp_steps);
  const auto len = static_cast<std::size_t>(p.diurnal_peak_len_steps);

  for (std::size_t t = 0; t < out.size(); ++t) {
    const double x = static_cast<double>(t) + p.diurnal_phase_steps + phase_jitter;
    const double daily = p.base_rps *
                         (1.0 + p.diurnal_amplitude_frac * std::sin(kTwoPi * x / p.diurnal_period_steps));
    const double ripple = p.base_rps * p.diurnal_ripple_frac *
                          std::sin(kTwoPi * x / p.diurnal_ripple_period_steps);
    const double w = window_weight(t, peak_start, ramp, len);
    // The burst multiplies the daily curve; the ripple fades out under it.
    const double level = daily * (1.0 + (p.diurnal_peak_factor - 1.0) * w) + ripple * (1.0 - w);
    out[t] = clamp0(level + gen.gaussian(0.0, p.diurnal_noise_sigma));
  }
}

void generate_flash_crowd(std::vector<double>& out, const TraceParams& p, rng::Xoshiro256pp& gen) {
  const double phase_jitter = gen.uniform(0.0, static_cast<double>(p.flash_osc_period_steps));
  const double start_jitter = gen.uniform(0.0, 10.0);
  const auto start = static_cast<std::size_t>(
      p.flash_start_frac * static_cast<double>(out.size()) + start_jitter);
  const auto ramp = static_cast<std::size_t>(p.flash_ramp_steps);
  const auto len = static_cast<std::size_t>(p.flash_window_steps);

  for (std::size_t t = 0; t < out.size(); ++t) {
    const double x = static_cast<double>(t) + phase_jitter;
    const double osc = p.base_rps * p.flash_osc_frac *
                       std::sin(kTwoPi * x / p.flash_osc_period_steps);
    const double w = window_weight(t, start, ramp, len);
    const double level = p.base_rps * (1.0 + (p.flash_factor - 1.0) * w) + osc * (1.0 - w);
    out[t] = clamp0(level + gen.gaussian(0.0, p.flash_noise_sigma));
  }
}

void generate_slow_ramp(std::vector<double>& out, const TraceParams& p, rng::Xoshiro256pp& gen) {
  const double span = static_cast<double>(out.size() > 1 ? out.size() - 1 : 1);
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double level = p.ramp_start_rps +
                         (p.ramp_end_rps - p.ramp_start_rps) * static_cast<double>(t) / span;
    out[t] = clamp0(level + gen.gaussian(0.0, p.ramp_noise_sigma));
  }
}

void validate_params(const TraceParams& p) {
  if (p.base_rps < 0.0) throw ConfigError("trace: base_rps must be >= 0");
  if (p.smooth_period_steps <= 0.0 || p.diurnal_period_steps <= 0.0 ||
      p.diurnal_ripple_period_steps <= 0.0 || p.flash_osc_period_steps <= 0.0 ||
      p.bursty_spike_period_steps <= 0.0) {
    throw ConfigError("trace: periods must be positive");
  }
  if (p.smooth_noise_sigma < 0.0 || p.diurnal_noise_sigma < 0.0 ||
      p.flash_noise_sigma < 0.0 || p.ramp_noise_sigma < 0.0) {
    throw ConfigError("trace: noise sigma must be >= 0");
  }
  if (p.bursty_spike_factor_min > p.bursty_spike_factor_max) {
    throw ConfigError("trace: bursty spike factor range is inverted");
  }
  if (p.bimodal_mean_hold_steps < 1.0) {
    throw ConfigError("trace: bimodal_mean_hold_steps must be >= 1");
  }
  if (p.flash_factor < 1.0 || p.diurnal_peak_factor < 1.0) {
    throw ConfigError("trace: spike factors must be >= 1");
  }
}

}  // namespace

const std::vector<Archetype>& all_archetypes() {
  static const std::vector<Archetype> kAll = {
      Archetype::smooth,        Archetype::bursty,      Archetype::bimodal,
      Archetype::diurnal_burst, Archetype::flash_crowd, Archetype::slow_ramp,
  };
  return kAll;
}

std::string to_string(Archetype archetype) {
  switch (archetype) {
    case Archetype::smooth: return "smooth";
    case Archetype::bursty: return "bursty";
    case Archetype::bimodal: return "bimodal";
    case Archetype::diurnal_burst: return "diurnal_burst";
    case Archetype::flash_crowd: return "flash_crowd";
    case Archetype::slow_ramp: return "slow_ramp";
  }
  throw ConfigError("trace: unknown archetype value");
}

Archetype archetype_from_string(const std::string& name) {
  for (Archetype a : all_archetypes()) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("trace: unknown archetype '" + name + "'");
}

WorkloadTrace generate(Archetype archetype, std::uint64_t seed,
                       std::size_t num_steps, const TraceParams& params,
                       double step_seconds) {
  if (num_steps < 1) throw ConfigError("trace: num_steps must be >= 1");
  if (step_seconds <= 0.0) throw ConfigError("trace: step_seconds must be positive");
  validate_params(params);

  WorkloadTrace trace;
  trace.archetype = archetype;
  trace.seed = seed;
  trace.step_seconds = step_seconds;
  trace.rps.assign(num_steps, 0.0);

  auto gen = make_generator(archetype, seed);
  switch (archetype) {
    case Archetype::smooth: generate_smooth(trace.rps, params, gen); break;
    case Archetype::bursty: generate_bursty(trace.rps, params, gen); break;
    case Archetype::bimodal: generate_bimodal(trace.rps, params, gen); break;
    case Archetype::diurnal_burst: generate_diurnal_burst(trace.rps, params, gen); break;
    case Archetype::flash_crowd: generate_flash_crowd(trace.rps, params, gen); break;
    case Archetype::slow_ramp: generate_slow_ramp(trace.rps, params, gen); break;
  }
  return trace;
}

SplitIndices split(const WorkloadTrace& trace) {
  const std::size_t n = trace.size();
  if (n < 10) throw ConfigError("trace: need at least 10 steps to split 70/10/20");
  SplitIndices idx;
  idx.train_end = n * 7 / 10;
  idx.val_end = idx.train_end + n / 10;
  idx.test_end = n;
  return idx;
}

void write_trace_csv(const WorkloadTrace& trace, std::ostream& out) {
  out << "step,rps\n";
  char buf[64];
  for (std::size_t t = 0; t < trace.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", t, trace.rps[t]);
    out << buf;
  }
}

std::vector<double> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,rps", 0) != 0) {
    throw ConfigError("trace csv: missing 'step,rps' header");
  }
  std::vector<double> rps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("trace csv: malformed row '" + line + "'");
    const double value = std::stod(line.substr(comma + 1));
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError("trace csv: rps values must be finite and >= 0");
    }
    rps.push_back(value);
  }
  return rps;
}

}  // namespace scalesim
