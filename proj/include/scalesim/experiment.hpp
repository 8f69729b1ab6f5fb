#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scalesim/engine.hpp"
#include "scalesim/stats.hpp"
#include "scalesim/trace.hpp"

namespace scalesim {

using ordered_json = nlohmann::ordered_json;

struct PolicySpec {
  PolicyKind policy = PolicyKind::hpa;
  ForecastMethod forecaster = ForecastMethod::ar_ls;  // ignored for hpa

  std::string label() const;
  bool operator==(const PolicySpec&) const = default;
};

struct ExperimentConfig {
  std::size_t num_steps = 500;
  double step_seconds = 60.0;
  std::vector<std::uint64_t> seeds = {42, 123, 456, 789, 1337};
  std::vector<Archetype> archetypes;  // defaults to all six
  std::vector<PolicySpec> policies;   // defaults to hpa, mpc+des, mpc+ar_ls
  TraceParams trace;
  CapacityModel capacity;
  MpcWeights weights;
  HpaParams hpa;
  EstimatorParams estimator;
  int horizon_buffer_steps = 1;
  ColdStartConfig cold_start;
  LatencyParams latency;
  ForecastParams forecast;
  double cost_per_replica_step = 1.0;

  std::vector<double> sweep_cold_start_seconds = {30, 60, 120, 180, 300};
  std::vector<Archetype> sweep_archetypes;  // defaults to all six

  std::vector<Archetype> ab_archetypes;  // defaults to diurnal_burst, flash_crowd
  int ab_fixed_horizon = 2;
  ForecastMethod ab_forecaster = ForecastMethod::ar_ls;

  std::string out_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  ExperimentConfig();
  void validate() const;  // ConfigError with the offending field
};

// JSON config handling: file values overlay the defaults, unknown enum names
// fail loudly, and the fully resolved config can be echoed back out.
ExperimentConfig config_from_json(const ordered_json& j);
ExperimentConfig load_config_file(const std::string& path);
ordered_json config_to_json(const ExperimentConfig& config);

RunConfig make_run_config(const ExperimentConfig& config, const PolicySpec& spec,
                          std::uint64_t seed, std::optional<int> fixed_horizon = {});

struct CellResult {
  PolicySpec spec;
  Archetype workload = Archetype::smooth;
  std::uint64_t seed = 0;
  double cold_start_seconds = 0.0;  // nominal used for this cell
  RunMetrics metrics;
  double objective_total = 0.0;
};

struct MatrixResults {
  std::vector<CellResult> cells;
  ordered_json config_echo;
};

struct SweepResults {
  std::vector<CellResult> cells;  // one per (level, policy, workload, seed)
  ordered_json config_echo;
};

struct AbArmResult {
  Archetype workload = Archetype::diurnal_burst;
  std::uint64_t seed = 0;
  double rate_adaptive = 0.0;  // derived-horizon arm
  double rate_fixed = 0.0;     // fixed-horizon arm
};

struct AbResults {
  std::vector<AbArmResult> pairs_by_cell;     // per (workload, seed)
  std::vector<double> per_seed_adaptive;      // per-seed rates, averaged over workloads
  std::vector<double> per_seed_fixed;
  PairedTestResult test;
  std::string power_caveat;
  ordered_json config_echo;
};

// Experiment suites. When out_dir is non-empty, per-run step CSVs plus
// summary.csv / summary.json / report files are written under
// <out_dir>/<suite>/; pass "" to run purely in memory.
MatrixResults run_matrix(const ExperimentConfig& config, const std::string& out_dir);
SweepResults run_sensitivity(const ExperimentConfig& config, const std::string& out_dir);
AbResults run_fhopt_ab(const ExperimentConfig& config, const std::string& out_dir);
void generate_trace_files(const ExperimentConfig& config, const std::string& out_dir);

// Report rendering (markdown tables backed by CSV data). Missing cells are
// marked rather than fatal; an entirely empty result set is an error.
std::string render_matrix_report(const MatrixResults& results);
std::string render_sweep_report(const SweepResults& results);
std::string render_ab_report(const AbResults& results);

void write_steps_csv(std::span<const StepRecord> records, std::ostream& out);

}  // namespace scalesim
