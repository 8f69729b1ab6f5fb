#include "scalesim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "scalesim/errors.hpp"

namespace scalesim {

namespace fs = std::filesystem;

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << content;
}

template <typename T>
void maybe_get(const ordered_json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

std::vector<Archetype> archetypes_from_json(const ordered_json& names) {
  std::vector<Archetype> out;
  for (const auto& n : names) out.push_back(archetype_from_string(n.get<std::string>()));
  return out;
}

ordered_json archetypes_to_json(const std::vector<Archetype>& archetypes) {
  ordered_json out = ordered_json::array();
  for (Archetype a : archetypes) out.push_back(to_string(a));
  return out;
}

// Runs fn(0..count-1) on a small worker pool; the first exception wins and is
// rethrown on the caller thread after all workers drain.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(count));

  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::scoped_lock lock(error_mutex);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string cell_dir_name(const std::string& policy_label, Archetype workload,
                          std::uint64_t seed) {
  return policy_label + "_" + to_string(workload) + "_" + std::to_string(seed);
}

std::string steps_csv_string(std::span<const StepRecord> records) {
  std::ostringstream out;
  write_steps_csv(records, out);
  return out.str();
}

std::string trace_csv_string(const WorkloadTrace& trace) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  return out.str();
}

struct CellIdentity {
  std::string policy;
  Archetype workload;
  std::uint64_t seed;
  double cold_start;
};

std::string describe(const CellIdentity& id) {
  return "cell (policy=" + id.policy + ", workload=" + to_string(id.workload) +
         ", seed=" + std::to_string(id.seed) +
         ", cold_start=" + fmt6(id.cold_start) + "s)";
}

void sort_cells(std::vector<CellResult>& cells) {
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    const auto ka = std::make_tuple(a.spec.label(), to_string(a.workload), a.seed,
                                    a.cold_start_seconds);
    const auto kb = std::make_tuple(b.spec.label(), to_string(b.workload), b.seed,
                                    b.cold_start_seconds);
    return ka < kb;
  });
}

std::string cells_csv(const std::vector<CellResult>& cells, bool with_cold_start) {
  std::ostringstream out;
  if (with_cold_start) out << "cold_start_seconds,";
  out << "policy,workload,seed,sla_violation_rate,total_cost_replica_minutes,"
         "avg_replicas,avg_latency_ms\n";
  for (const auto& c : cells) {
    if (with_cold_start) out << fmt6(c.cold_start_seconds) << ",";
    out << c.spec.label() << "," << to_string(c.workload) << "," << c.seed << ","
        << fmt6(c.metrics.sla_violation_rate) << ","
        << fmt6(c.metrics.total_cost_replica_minutes) << ","
        << fmt6(c.metrics.avg_replicas) << "," << fmt6(c.metrics.avg_latency_ms) << "\n";
  }
  return out.str();
}

// Aggregate rows keyed by (policy, workload): mean and CI over seeds.
struct Aggregate {
  MeanCi rate, cost, replicas, latency;
  int n = 0;
};

std::map<std::pair<std::string, std::string>, Aggregate> aggregate_cells(
    const std::vector<CellResult>& cells) {
  std::map<std::pair<std::string, std::string>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) {
    groups[{c.spec.label(), to_string(c.workload)}].push_back(&c);
  }
  std::map<std::pair<std::string, std::string>, Aggregate> out;
  for (auto& [key, group] : groups) {
    std::vector<double> rate, cost, replicas, latency;
    for (const auto* c : group) {
      rate.push_back(c->metrics.sla_violation_rate);
      cost.push_back(c->metrics.total_cost_replica_minutes);
      replicas.push_back(c->metrics.avg_replicas);
      latency.push_back(c->metrics.avg_latency_ms);
    }
    Aggregate agg;
    agg.rate = mean_ci95(rate);
    agg.cost = mean_ci95(cost);
    agg.replicas = mean_ci95(replicas);
    agg.latency = mean_ci95(latency);
    agg.n = static_cast<int>(group.size());
    out[key] = agg;
  }
  return out;
}

ordered_json mean_ci_json(const MeanCi& v) {
  ordered_json j;
  j["mean"] = v.mean;
  if (v.half_width) {
    j["ci95_half_width"] = *v.half_width;
  } else {
    j["ci95_half_width"] = nullptr;
  }
  return j;
}

ordered_json cells_json(const std::vector<CellResult>& cells) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json j;
    j["policy"] = c.spec.label();
    j["workload"] = to_string(c.workload);
    j["seed"] = c.seed;
    j["cold_start_seconds"] = c.cold_start_seconds;
    j["sla_violation_rate"] = c.metrics.sla_violation_rate;
    j["total_cost_replica_minutes"] = c.metrics.total_cost_replica_minutes;
    j["avg_replicas"] = c.metrics.avg_replicas;
    j["avg_latency_ms"] = c.metrics.avg_latency_ms;
    j["objective_total"] = c.objective_total;
    arr.push_back(j);
  }
  return arr;
}

ordered_json summary_json(const std::vector<CellResult>& cells, const ordered_json& echo) {
  ordered_json j;
  j["config"] = echo;
  j["ci_method"] = "student_t_95";
  j["cells"] = cells_json(cells);
  ordered_json aggs = ordered_json::array();
  for (const auto& [key, agg] : aggregate_cells(cells)) {
    ordered_json a;
    a["policy"] = key.first;
    a["workload"] = key.second;
    a["n_seeds"] = agg.n;
    a["sla_violation_rate"] = mean_ci_json(agg.rate);
    a["total_cost_replica_minutes"] = mean_ci_json(agg.cost);
    a["avg_replicas"] = mean_ci_json(agg.replicas);
    a["avg_latency_ms"] = mean_ci_json(agg.latency);
    aggs.push_back(a);
  }
  j["aggregates"] = aggs;
  return j;
}

std::string fmt_mean_ci(const MeanCi& v, double scale = 1.0) {
  if (v.half_width) {
    return fmt6(v.mean * scale) + " +/- " + fmt6(*v.half_width * scale);
  }
  return fmt6(v.mean * scale) + " +/- n/a";
}

}  // namespace

std::string PolicySpec::label() const {
  if (policy == PolicyKind::hpa) return "hpa";
  return "mpc-" + to_string(forecaster);
}

ExperimentConfig::ExperimentConfig() {
  archetypes = all_archetypes();
  sweep_archetypes = all_archetypes();
  ab_archetypes = {Archetype::diurnal_burst, Archetype::flash_crowd};
  policies = {
      {PolicyKind::hpa, ForecastMethod::ar_ls},
      {PolicyKind::mpc, ForecastMethod::des},
      {PolicyKind::mpc, ForecastMethod::ar_ls},
  };
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("config: 'seeds' must not be empty");
  if (archetypes.empty()) throw ConfigError("config: 'archetypes' must not be empty");
  if (policies.empty()) throw ConfigError("config: 'policies' must not be empty");
  if (num_steps < 10) throw ConfigError("config: 'num_steps' must be >= 10");
  if (step_seconds <= 0.0) throw ConfigError("config: 'step_seconds' must be positive");
  if (cold_start.nominal_seconds < estimator.clip_min_seconds ||
      cold_start.nominal_seconds > estimator.clip_max_seconds) {
    throw ConfigError(
        "config: 'cold_start.nominal_seconds' must lie inside the estimator clip bounds");
  }
  for (double level : sweep_cold_start_seconds) {
    if (level < estimator.clip_min_seconds || level > estimator.clip_max_seconds) {
      throw ConfigError("config: sweep cold-start level " + fmt6(level) +
                        " is outside the estimator clip bounds");
    }
  }
  if (ab_fixed_horizon < 1) throw ConfigError("config: 'abtest.fixed_horizon' must be >= 1");
}

ExperimentConfig config_from_json(const ordered_json& j) {
  ExperimentConfig c;
  maybe_get(j, "num_steps", c.num_steps);
  maybe_get(j, "step_seconds", c.step_seconds);
  maybe_get(j, "seeds", c.seeds);
  if (j.contains("archetypes")) c.archetypes = archetypes_from_json(j.at("archetypes"));
  if (j.contains("policies")) {
    c.policies.clear();
    for (const auto& p : j.at("policies")) {
      PolicySpec spec;
      spec.policy = policy_kind_from_string(p.at("policy").get<std::string>());
      if (spec.policy == PolicyKind::mpc) {
        if (!p.contains("forecaster")) {
          throw ConfigError("config: mpc policy entries need a 'forecaster'");
        }
        spec.forecaster = forecast_method_from_string(p.at("forecaster").get<std::string>());
      }
      c.policies.push_back(spec);
    }
  }
  if (j.contains("trace")) {
    const auto& t = j.at("trace");
    maybe_get(t, "base_rps", c.trace.base_rps);
    maybe_get(t, "smooth_period_steps", c.trace.smooth_period_steps);
    maybe_get(t, "smooth_amplitude_rps", c.trace.smooth_amplitude_rps);
    maybe_get(t, "smooth_noise_sigma", c.trace.smooth_noise_sigma);
    maybe_get(t, "bursty_spike_period_steps", c.trace.bursty_spike_period_steps);
    maybe_get(t, "bursty_spike_period_jitter", c.trace.bursty_spike_period_jitter);
    maybe_get(t, "bursty_spike_len_steps", c.trace.bursty_spike_len_steps);
    maybe_get(t, "bursty_spike_factor_min", c.trace.bursty_spike_factor_min);
    maybe_get(t, "bursty_spike_factor_max", c.trace.bursty_spike_factor_max);
    maybe_get(t, "bimodal_low_rps", c.trace.bimodal_low_rps);
    maybe_get(t, "bimodal_high_rps", c.trace.bimodal_high_rps);
    maybe_get(t, "bimodal_mean_hold_steps", c.trace.bimodal_mean_hold_steps);
    maybe_get(t, "diurnal_period_steps", c.trace.diurnal_period_steps);
    maybe_get(t, "diurnal_amplitude_frac", c.trace.diurnal_amplitude_frac);
    maybe_get(t, "diurnal_phase_steps", c.trace.diurnal_phase_steps);
    maybe_get(t, "diurnal_ripple_frac", c.trace.diurnal_ripple_frac);
    maybe_get(t, "diurnal_ripple_period_steps", c.trace.diurnal_ripple_period_steps);
    maybe_get(t, "diurnal_peak_factor", c.trace.diurnal_peak_factor);
    maybe_get(t, "diurnal_peak_start_frac", c.trace.diurnal_peak_start_frac);
    maybe_get(t, "diurnal_peak_len_steps", c.trace.diurnal_peak_len_steps);
    maybe_get(t, "diurnal_peak_ramp_steps", c.trace.diurnal_peak_ramp_steps);
    maybe_get(t, "diurnal_noise_sigma", c.trace.diurnal_noise_sigma);
    maybe_get(t, "flash_factor", c.trace.flash_factor);
    maybe_get(t, "flash_start_frac", c.trace.flash_start_frac);
    maybe_get(t, "flash_window_steps", c.trace.flash_window_steps);
    maybe_get(t, "flash_ramp_steps", c.trace.flash_ramp_steps);
    maybe_get(t, "flash_osc_frac", c.trace.flash_osc_frac);
    maybe_get(t, "flash_osc_period_steps", c.trace.flash_osc_period_steps);
    maybe_get(t, "flash_noise_sigma", c.trace.flash_noise_sigma);
    maybe_get(t, "ramp_start_rps", c.trace.ramp_start_rps);
    maybe_get(t, "ramp_end_rps", c.trace.ramp_end_rps);
    maybe_get(t, "ramp_noise_sigma", c.trace.ramp_noise_sigma);
  }
  if (j.contains("capacity")) {
    const auto& x = j.at("capacity");
    maybe_get(x, "per_replica_rps", c.capacity.per_replica_rps);
    maybe_get(x, "n_min", c.capacity.n_min);
    maybe_get(x, "n_max", c.capacity.n_max);
  }
  if (j.contains("weights")) {
    const auto& x = j.at("weights");
    maybe_get(x, "w_sla", c.weights.w_sla);
    maybe_get(x, "w_cost", c.weights.w_cost);
    maybe_get(x, "w_stab", c.weights.w_stab);
    maybe_get(x, "gamma", c.weights.gamma);
  }
  if (j.contains("hpa")) {
    const auto& x = j.at("hpa");
    maybe_get(x, "target_utilization", c.hpa.target_utilization);
    maybe_get(x, "tolerance", c.hpa.tolerance);
  }
  if (j.contains("estimator")) {
    const auto& x = j.at("estimator");
    maybe_get(x, "alpha", c.estimator.alpha);
    maybe_get(x, "prior_seconds", c.estimator.prior_seconds);
    maybe_get(x, "clip_min_seconds", c.estimator.clip_min_seconds);
    maybe_get(x, "clip_max_seconds", c.estimator.clip_max_seconds);
  }
  maybe_get(j, "horizon_buffer_steps", c.horizon_buffer_steps);
  if (j.contains("cold_start")) {
    const auto& x = j.at("cold_start");
    maybe_get(x, "nominal_seconds", c.cold_start.nominal_seconds);
    maybe_get(x, "jitter_fraction", c.cold_start.jitter_fraction);
    maybe_get(x, "jitter_enabled", c.cold_start.jitter_enabled);
  }
  if (j.contains("latency")) {
    const auto& x = j.at("latency");
    maybe_get(x, "base_ms", c.latency.base_ms);
    maybe_get(x, "sla_ms", c.latency.sla_ms);
  }
  if (j.contains("forecast")) {
    const auto& x = j.at("forecast");
    maybe_get(x, "des_alpha", c.forecast.des_alpha);
    maybe_get(x, "des_beta", c.forecast.des_beta);
    maybe_get(x, "ar_order", c.forecast.ar_order);
    maybe_get(x, "seasonal_period", c.forecast.seasonal_period);
  }
  maybe_get(j, "cost_per_replica_step", c.cost_per_replica_step);
  if (j.contains("sweep")) {
    const auto& x = j.at("sweep");
    maybe_get(x, "cold_start_seconds", c.sweep_cold_start_seconds);
    if (x.contains("archetypes")) c.sweep_archetypes = archetypes_from_json(x.at("archetypes"));
  }
  if (j.contains("abtest")) {
    const auto& x = j.at("abtest");
    if (x.contains("archetypes")) c.ab_archetypes = archetypes_from_json(x.at("archetypes"));
    maybe_get(x, "fixed_horizon", c.ab_fixed_horizon);
    if (x.contains("forecaster")) {
      c.ab_forecaster = forecast_method_from_string(x.at("forecaster").get<std::string>());
    }
  }
  maybe_get(j, "out_dir", c.out_dir);
  maybe_get(j, "threads", c.threads);
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: failed to parse '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["num_steps"] = c.num_steps;
  j["step_seconds"] = c.step_seconds;
  j["seeds"] = c.seeds;
  j["archetypes"] = archetypes_to_json(c.archetypes);
  ordered_json policies = ordered_json::array();
  for (const auto& p : c.policies) {
    ordered_json e;
    e["policy"] = to_string(p.policy);
    if (p.policy == PolicyKind::mpc) e["forecaster"] = to_string(p.forecaster);
    policies.push_back(e);
  }
  j["policies"] = policies;
  j["trace"] = {
      {"base_rps", c.trace.base_rps},
      {"smooth_period_steps", c.trace.smooth_period_steps},
      {"smooth_amplitude_rps", c.trace.smooth_amplitude_rps},
      {"smooth_noise_sigma", c.trace.smooth_noise_sigma},
      {"bursty_spike_period_steps", c.trace.bursty_spike_period_steps},
      {"bursty_spike_period_jitter", c.trace.bursty_spike_period_jitter},
      {"bursty_spike_len_steps", c.trace.bursty_spike_len_steps},
      {"bursty_spike_factor_min", c.trace.bursty_spike_factor_min},
      {"bursty_spike_factor_max", c.trace.bursty_spike_factor_max},
      {"bimodal_low_rps", c.trace.bimodal_low_rps},
      {"bimodal_high_rps", c.trace.bimodal_high_rps},
      {"bimodal_mean_hold_steps", c.trace.bimodal_mean_hold_steps},
      {"diurnal_period_steps", c.trace.diurnal_period_steps},
      {"diurnal_amplitude_frac", c.trace.diurnal_amplitude_frac},
      {"diurnal_phase_steps", c.trace.diurnal_phase_steps},
      {"diurnal_ripple_frac", c.trace.diurnal_ripple_frac},
      {"diurnal_ripple_period_steps", c.trace.diurnal_ripple_period_steps},
      {"diurnal_peak_factor", c.trace.diurnal_peak_factor},
      {"diurnal_peak_start_frac", c.trace.diurnal_peak_start_frac},
      {"diurnal_peak_len_steps", c.trace.diurnal_peak_len_steps},
      {"diurnal_peak_ramp_steps", c.trace.diurnal_peak_ramp_steps},
      {"diurnal_noise_sigma", c.trace.diurnal_noise_sigma},
      {"flash_factor", c.trace.flash_factor},
      {"flash_start_frac", c.trace.flash_start_frac},
      {"flash_window_steps", c.trace.flash_window_steps},
      {"flash_ramp_steps", c.trace.flash_ramp_steps},
      {"flash_osc_frac", c.trace.flash_osc_frac},
      {"flash_osc_period_steps", c.trace.flash_osc_period_steps},
      {"flash_noise_sigma", c.trace.flash_noise_sigma},
      {"ramp_start_rps", c.trace.ramp_start_rps},
      {"ramp_end_rps", c.trace.ramp_end_rps},
      {"ramp_noise_sigma", c.trace.ramp_noise_sigma},
  };
  j["capacity"] = {{"per_replica_rps", c.capacity.per_replica_rps},
                   {"n_min", c.capacity.n_min},
                   {"n_max", c.capacity.n_max}};
  j["weights"] = {{"w_sla", c.weights.w_sla},
                  {"w_cost", c.weights.w_cost},
                  {"w_stab", c.weights.w_stab},
                  {"gamma", c.weights.gamma}};
  j["hpa"] = {{"target_utilization", c.hpa.target_utilization},
              {"tolerance", c.hpa.tolerance}};
  j["estimator"] = {{"alpha", c.estimator.alpha},
                    {"prior_seconds", c.estimator.prior_seconds},
                    {"clip_min_seconds", c.estimator.clip_min_seconds},
                    {"clip_max_seconds", c.estimator.clip_max_seconds}};
  j["horizon_buffer_steps"] = c.horizon_buffer_steps;
  j["cold_start"] = {{"nominal_seconds", c.cold_start.nominal_seconds},
                     {"jitter_fraction", c.cold_start.jitter_fraction},
                     {"jitter_enabled", c.cold_start.jitter_enabled}};
  j["latency"] = {{"base_ms", c.latency.base_ms}, {"sla_ms", c.latency.sla_ms}};
  j["forecast"] = {{"des_alpha", c.forecast.des_alpha},
                   {"des_beta", c.forecast.des_beta},
                   {"ar_order", c.forecast.ar_order},
                   {"seasonal_period", c.forecast.seasonal_period}};
  j["cost_per_replica_step"] = c.cost_per_replica_step;
  j["sweep"] = {{"cold_start_seconds", c.sweep_cold_start_seconds},
                {"archetypes", archetypes_to_json(c.sweep_archetypes)}};
  j["abtest"] = {{"archetypes", archetypes_to_json(c.ab_archetypes)},
                 {"fixed_horizon", c.ab_fixed_horizon},
                 {"forecaster", to_string(c.ab_forecaster)}};
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  return j;
}

RunConfig make_run_config(const ExperimentConfig& config, const PolicySpec& spec,
                          std::uint64_t seed, std::optional<int> fixed_horizon) {
  RunConfig rc;
  rc.policy = spec.policy;
  rc.forecaster = spec.forecaster;
  rc.capacity = config.capacity;
  rc.weights = config.weights;
  rc.hpa = config.hpa;
  rc.estimator = config.estimator;
  rc.horizon_buffer_steps = config.horizon_buffer_steps;
  rc.cold_start = config.cold_start;
  rc.latency = config.latency;
  rc.forecast = config.forecast;
  rc.cost_per_replica_step = config.cost_per_replica_step;
  rc.fixed_horizon = fixed_horizon;
  rc.jitter_seed = seed;
  return rc;
}

namespace {

CellResult run_cell(const ExperimentConfig& config, const PolicySpec& spec,
                    Archetype workload, std::uint64_t seed, double cold_start_seconds,
                    const std::string& out_dir, const std::string& suite) {
  const CellIdentity id{spec.label(), workload, seed, cold_start_seconds};
  try {
    const auto trace =
        generate(workload, seed, config.num_steps, config.trace, config.step_seconds);
    auto rc = make_run_config(config, spec, seed);
    rc.cold_start.nominal_seconds = cold_start_seconds;
    const auto records = run(trace, rc);

    CellResult cell;
    cell.spec = spec;
    cell.workload = workload;
    cell.seed = seed;
    cell.cold_start_seconds = cold_start_seconds;
    cell.metrics = summarize_run(records);
    cell.metrics.policy = spec.label();
    cell.metrics.workload = to_string(workload);
    cell.metrics.seed = seed;
    cell.objective_total = objective_aggregate(records, config.weights, config.capacity.n_max);

    if (!out_dir.empty()) {
      const fs::path dir = fs::path(out_dir) / suite / cell_dir_name(spec.label(), workload, seed);
      write_file(dir / "steps.csv", steps_csv_string(records));
    }
    return cell;
  } catch (const std::exception& e) {
    throw ConfigError(describe(id) + " failed: " + e.what());
  }
}

void mark_incomplete(const std::string& out_dir, const std::string& suite,
                     const std::string& why) {
  if (out_dir.empty()) return;
  try {
    write_file(fs::path(out_dir) / suite / "INCOMPLETE", why + "\n");
  } catch (...) {
    // Best effort; the original error is what matters.
  }
}

}  // namespace

MatrixResults run_matrix(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  const std::string suite = "matrix";

  struct Task {
    PolicySpec spec;
    Archetype workload;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& spec : config.policies)
    for (Archetype workload : config.archetypes)
      for (std::uint64_t seed : config.seeds) tasks.push_back({spec, workload, seed});

  MatrixResults results;
  results.cells.resize(tasks.size());
  results.config_echo = config_to_json(config);

  try {
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
      const auto& t = tasks[i];
      results.cells[i] = run_cell(config, t.spec, t.workload, t.seed,
                                  config.cold_start.nominal_seconds, out_dir, suite);
    });
  } catch (...) {
    mark_incomplete(out_dir, suite, "matrix aborted before all cells completed");
    throw;
  }

  sort_cells(results.cells);
  if (!out_dir.empty()) {
    const fs::path dir = fs::path(out_dir) / suite;
    write_file(dir / "summary.csv", cells_csv(results.cells, false));
    write_file(dir / "summary.json",
               summary_json(results.cells, results.config_echo).dump(2) + "\n");
    write_file(dir / "report.md", render_matrix_report(results));
  }
  return results;
}

SweepResults run_sensitivity(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  const std::string suite = "sweep";

  struct Task {
    double level;
    PolicySpec spec;
    Archetype workload;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double level : config.sweep_cold_start_seconds)
    for (const auto& spec : config.policies)
      for (Archetype workload : config.sweep_archetypes)
        for (std::uint64_t seed : config.seeds) tasks.push_back({level, spec, workload, seed});

  SweepResults results;
  results.cells.resize(tasks.size());
  results.config_echo = config_to_json(config);

  try {
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
      const auto& t = tasks[i];
      char level_tag[32];
      std::snprintf(level_tag, sizeof(level_tag), "cs%03d", static_cast<int>(t.level));
      results.cells[i] = run_cell(config, t.spec, t.workload, t.seed, t.level,
                                  out_dir.empty() ? "" : out_dir,
                                  suite + "/" + level_tag);
    });
  } catch (...) {
    mark_incomplete(out_dir, suite, "sweep aborted before all cells completed");
    throw;
  }

  sort_cells(results.cells);
  if (!out_dir.empty()) {
    const fs::path dir = fs::path(out_dir) / suite;
    write_file(dir / "summary.csv", cells_csv(results.cells, true));
    write_file(dir / "summary.json",
               summary_json(results.cells, results.config_echo).dump(2) + "\n");
    write_file(dir / "report.md", render_sweep_report(results));

    // Heatmap data: level x policy, violation rate averaged over workloads and seeds.
    std::map<std::pair<double, std::string>, std::pair<double, int>> grid;
    for (const auto& c : results.cells) {
      auto& slot = grid[{c.cold_start_seconds, c.spec.label()}];
      slot.first += c.metrics.sla_violation_rate;
      slot.second += 1;
    }
    std::ostringstream out;
    out << "cold_start_seconds,policy,mean_sla_violation_rate\n";
    for (const auto& [key, slot] : grid) {
      out << fmt6(key.first) << "," << key.second << "," << fmt6(slot.first / slot.second)
          << "\n";
    }
    write_file(dir / "grid.csv", out.str());
  }
  return results;
}

AbResults run_fhopt_ab(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  const std::string suite = "abtest";
  const PolicySpec spec{PolicyKind::mpc, config.ab_forecaster};

  struct Task {
    Archetype workload;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Archetype workload : config.ab_archetypes)
    for (std::uint64_t seed : config.seeds) tasks.push_back({workload, seed});

  AbResults results;
  results.pairs_by_cell.resize(tasks.size());
  results.config_echo = config_to_json(config);

  try {
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
      const auto& t = tasks[i];
      const auto trace =
          generate(t.workload, t.seed, config.num_steps, config.trace, config.step_seconds);

      // Both arms consume the same trace and the same counter-keyed jitter
      // stream; only the horizon mode differs.
      auto adaptive = make_run_config(config, spec, t.seed);
      auto fixed = make_run_config(config, spec, t.seed, config.ab_fixed_horizon);
      const auto rec_a = run(trace, adaptive);
      const auto rec_f = run(trace, fixed);

      AbArmResult pair;
      pair.workload = t.workload;
      pair.seed = t.seed;
      pair.rate_adaptive = summarize_run(rec_a).sla_violation_rate;
      pair.rate_fixed = summarize_run(rec_f).sla_violation_rate;
      results.pairs_by_cell[i] = pair;

      if (!out_dir.empty()) {
        const fs::path base = fs::path(out_dir) / suite;
        const std::string cell = to_string(t.workload) + "_" + std::to_string(t.seed);
        write_file(base / ("fhopt_" + cell) / "steps.csv", steps_csv_string(rec_a));
        write_file(base / ("fhopt_" + cell) / "trace.csv", trace_csv_string(trace));
        write_file(base / ("fixed_" + cell) / "steps.csv", steps_csv_string(rec_f));
        write_file(base / ("fixed_" + cell) / "trace.csv", trace_csv_string(trace));
      }
    });
  } catch (...) {
    mark_incomplete(out_dir, suite, "abtest aborted before all cells completed");
    throw;
  }

  std::sort(results.pairs_by_cell.begin(), results.pairs_by_cell.end(),
            [](const AbArmResult& a, const AbArmResult& b) {
              return std::make_tuple(to_string(a.workload), a.seed) <
                     std::make_tuple(to_string(b.workload), b.seed);
            });

  // One pair per seed: rates averaged over the A/B workloads.
  for (std::uint64_t seed : config.seeds) {
    double sum_a = 0.0, sum_f = 0.0;
    int n = 0;
    for (const auto& p : results.pairs_by_cell) {
      if (p.seed != seed) continue;
      sum_a += p.rate_adaptive;
      sum_f += p.rate_fixed;
      ++n;
    }
    results.per_seed_adaptive.push_back(sum_a / n);
    results.per_seed_fixed.push_back(sum_f / n);
  }
  results.test = wilcoxon_signed_rank(results.per_seed_adaptive, results.per_seed_fixed);

  const double min_p = wilcoxon_min_p(results.test.n_nonzero);
  if (min_p >= 0.05) {
    std::ostringstream caveat;
    caveat << "power caveat: with " << results.test.n_nonzero
           << " nonzero pairs the smallest attainable two-sided exact p is " << fmt6(min_p)
           << ", so significance at 0.05 is unreachable at this sample size";
    results.power_caveat = caveat.str();
  }

  if (!out_dir.empty()) {
    const fs::path dir = fs::path(out_dir) / suite;
    std::ostringstream csv;
    csv << "workload,seed,fhopt_rate,fixed_rate,diff\n";
    for (const auto& p : results.pairs_by_cell) {
      csv << to_string(p.workload) << "," << p.seed << "," << fmt6(p.rate_adaptive) << ","
          << fmt6(p.rate_fixed) << "," << fmt6(p.rate_adaptive - p.rate_fixed) << "\n";
    }
    write_file(dir / "summary.csv", csv.str());

    ordered_json j;
    j["config"] = results.config_echo;
    j["pairs"] = ordered_json::array();
    for (const auto& p : results.pairs_by_cell) {
      j["pairs"].push_back({{"workload", to_string(p.workload)},
                            {"seed", p.seed},
                            {"fhopt_rate", p.rate_adaptive},
                            {"fixed_rate", p.rate_fixed}});
    }
    j["per_seed_fhopt"] = results.per_seed_adaptive;
    j["per_seed_fixed"] = results.per_seed_fixed;
    j["wilcoxon"] = {{"w", results.test.statistic_w},
                     {"p_value", results.test.p_value},
                     {"n_pairs", results.test.n_pairs},
                     {"n_nonzero", results.test.n_nonzero},
                     {"significant_at_005", results.test.significant_at_005},
                     {"degenerate_all_zero", results.test.degenerate_all_zero}};
    j["power_caveat"] = results.power_caveat;
    write_file(dir / "summary.json", j.dump(2) + "\n");
    write_file(dir / "report.md", render_ab_report(results));
  }
  return results;
}

void generate_trace_files(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  for (Archetype workload : config.archetypes) {
    for (std::uint64_t seed : config.seeds) {
      const auto trace =
          generate(workload, seed, config.num_steps, config.trace, config.step_seconds);
      const fs::path path = fs::path(out_dir) / "traces" /
                            (to_string(workload) + "_" + std::to_string(seed) + ".csv");
      write_file(path, trace_csv_string(trace));
    }
  }
}

std::string render_matrix_report(const MatrixResults& results) {
  if (results.cells.empty()) throw ConfigError("report: no results to render");

  std::vector<std::string> policies, workloads;
  for (const auto& c : results.cells) {
    const auto p = c.spec.label();
    const auto w = to_string(c.workload);
    if (std::find(policies.begin(), policies.end(), p) == policies.end()) policies.push_back(p);
    if (std::find(workloads.begin(), workloads.end(), w) == workloads.end())
      workloads.push_back(w);
  }
  const auto aggs = aggregate_cells(results.cells);

  std::ostringstream out;
  auto table = [&](const std::string& title, auto metric, double scale) {
    out << "## " << title << "\n\n| policy |";
    for (const auto& w : workloads) out << " " << w << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < workloads.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& p : policies) {
      out << "| " << p << " |";
      for (const auto& w : workloads) {
        const auto it = aggs.find({p, w});
        out << " " << (it == aggs.end() ? std::string("missing") : fmt_mean_ci(metric(it->second), scale))
            << " |";
      }
      out << "\n";
    }
    out << "\n";
  };

  out << "# Policy matrix\n\n";
  table("SLA violation rate (%)", [](const Aggregate& a) { return a.rate; }, 100.0);
  table("Total cost (replica-minutes)", [](const Aggregate& a) { return a.cost; }, 1.0);
  table("Average replicas", [](const Aggregate& a) { return a.replicas; }, 1.0);
  table("Average latency (ms)", [](const Aggregate& a) { return a.latency; }, 1.0);
  out << "Intervals are 95% Student-t over seeds. With the bundled lightweight\n"
         "forecasters the MPC rows are expected to stay below a 10% violation rate\n"
         "on the burst archetypes; heavier forecasters can push that below 5%.\n";
  return out.str();
}

std::string render_sweep_report(const SweepResults& results) {
  if (results.cells.empty()) throw ConfigError("report: no results to render");

  std::vector<double> levels;
  std::vector<std::string> policies;
  std::map<std::pair<double, std::string>, std::pair<double, int>> grid;
  for (const auto& c : results.cells) {
    if (std::find(levels.begin(), levels.end(), c.cold_start_seconds) == levels.end())
      levels.push_back(c.cold_start_seconds);
    const auto p = c.spec.label();
    if (std::find(policies.begin(), policies.end(), p) == policies.end()) policies.push_back(p);
    auto& slot = grid[{c.cold_start_seconds, p}];
    slot.first += c.metrics.sla_violation_rate;
    slot.second += 1;
  }
  std::sort(levels.begin(), levels.end());

  std::ostringstream out;
  out << "# Cold-start sensitivity\n\nMean SLA violation rate (%) per cold-start level.\n\n";
  out << "| cold start (s) |";
  for (const auto& p : policies) out << " " << p << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < policies.size(); ++i) out << "---|";
  out << "\n";
  for (double level : levels) {
    out << "| " << fmt6(level) << " |";
    for (const auto& p : policies) {
      const auto it = grid.find({level, p});
      if (it == grid.end()) {
        out << " missing |";
      } else {
        out << " " << fmt6(100.0 * it->second.first / it->second.second) << " |";
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string render_ab_report(const AbResults& results) {
  if (results.pairs_by_cell.empty()) throw ConfigError("report: no results to render");

  std::ostringstream out;
  out << "# Horizon ablation: derived vs fixed\n\n";
  out << "| workload | seed | derived-horizon rate | fixed-horizon rate | diff |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& p : results.pairs_by_cell) {
    out << "| " << to_string(p.workload) << " | " << p.seed << " | " << fmt6(p.rate_adaptive)
        << " | " << fmt6(p.rate_fixed) << " | " << fmt6(p.rate_adaptive - p.rate_fixed)
        << " |\n";
  }
  out << "\nWilcoxon signed-rank on per-seed rates: W = " << fmt6(results.test.statistic_w)
      << ", two-sided exact p = " << fmt6(results.test.p_value)
      << ", n = " << results.test.n_pairs << " pairs (" << results.test.n_nonzero
      << " nonzero), significant at 0.05: "
      << (results.test.significant_at_005 ? "yes" : "no") << ".\n";
  if (!results.power_caveat.empty()) out << "\n" << results.power_caveat << "\n";
  return out.str();
}

void write_steps_csv(std::span<const StepRecord> records, std::ostream& out) {
  out << "step,rps,active,warming,capacity,utilization,latency_ms,violated,"
         "violation_fraction,cost,n_reactive,n_pro,target,horizon,adapt_estimate\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.6f,%d,%d,%.6f,%.6f,%.6f,%d,%.6f,%.6f,%d,%d,%d,%d,%.6f\n", r.step,
                  r.rps, r.active_replicas, r.warming_replicas, r.capacity_rps, r.utilization,
                  r.latency_ms, r.sla_violated ? 1 : 0, r.violation_fraction, r.cost_units,
                  r.n_reactive, r.n_pro, r.target_replicas, r.horizon,
                  r.adapt_estimate_seconds);
    out << buf;
  }
}

}  // namespace scalesim
