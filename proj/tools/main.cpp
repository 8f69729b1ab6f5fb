#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scalesim/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  double jitter = -1.0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
  cmd->add_option("--out", opts.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seeds", opts.seeds, "seed list override");
  cmd->add_option("--jitter", opts.jitter, "cold-start jitter fraction override")
      ->check(CLI::Range(0.0, 0.9));
}

scalesim::ExperimentConfig resolve(const CommonOptions& opts) {
  auto config = opts.config_path.empty() ? scalesim::ExperimentConfig{}
                                         : scalesim::load_config_file(opts.config_path);
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (!opts.seeds.empty()) config.seeds = opts.seeds;
  if (opts.jitter >= 0.0) {
    config.cold_start.jitter_fraction = opts.jitter;
    config.cold_start.jitter_enabled = opts.jitter > 0.0;
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalesim: deterministic autoscaling experiments on synthetic workloads"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto* matrix = app.add_subcommand("run-matrix", "full policy x workload x seed matrix");
  auto* sweep = app.add_subcommand("sweep", "cold-start sensitivity sweep");
  auto* abtest = app.add_subcommand("abtest", "derived-horizon vs fixed-horizon ablation");
  auto* gen = app.add_subcommand("gen-traces", "write the workload traces as CSV");
  for (auto* cmd : {matrix, sweep, abtest, gen}) add_common(cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = resolve(opts);
    if (matrix->parsed()) {
      const auto results = scalesim::run_matrix(config, config.out_dir);
      std::cout << scalesim::render_matrix_report(results);
      std::cout << "\nwrote " << results.cells.size() << " runs under " << config.out_dir
                << "/matrix\n";
    } else if (sweep->parsed()) {
      const auto results = scalesim::run_sensitivity(config, config.out_dir);
      std::cout << scalesim::render_sweep_report(results);
      std::cout << "\nwrote " << results.cells.size() << " runs under " << config.out_dir
                << "/sweep\n";
    } else if (abtest->parsed()) {
      const auto results = scalesim::run_fhopt_ab(config, config.out_dir);
      std::cout << scalesim::render_ab_report(results);
      std::cout << "\nwrote " << 2 * results.pairs_by_cell.size() << " runs under "
                << config.out_dir << "/abtest\n";
    } else if (gen->parsed()) {
      scalesim::generate_trace_files(config, config.out_dir);
      std::cout << "wrote " << config.archetypes.size() * config.seeds.size()
                << " traces under " << config.out_dir << "/traces\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
