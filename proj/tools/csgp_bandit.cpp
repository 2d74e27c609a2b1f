// Command-line driver: run experiments, reduce traces to plot-ready curves,
// and run the built-in validation suites.

#include <CLI11.hpp>

#include "csgp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Concave spline GP contextual bandit benchmark"};
  app.require_subcommand(1);

  csgp::CliOptions options;
  std::string trace_path;
  std::string suite = "all";
  std::uint64_t seed_value = 0;
  int jobs_value = 0;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* cfg = cmd->add_option("--config", options.config_path,
                                "experiment config file (JSON)");
    if (needs_config) cfg->required();
    cmd->add_option("--set", options.overrides,
                    "config override key.path=value (repeatable)");
    auto* seed = cmd->add_option("--seed", seed_value,
                                 "override experiment.base_seed");
    auto* jobs =
        cmd->add_option("--jobs", jobs_value, "replication parallelism");
    cmd->add_flag_callback("--quiet", [&] { options.verbosity = 0; });
    cmd->add_flag_callback("--verbose", [&] { options.verbosity = 2; });
    cmd->callback([&, seed, jobs] {
      if (seed->count() > 0) options.seed = seed_value;
      if (jobs->count() > 0) options.jobs = jobs_value;
    });
  };

  auto* run = app.add_subcommand("run", "run an experiment from a config");
  add_common(run, true);
  run->add_option("--out", options.output_dir, "output directory");

  auto* plot = app.add_subcommand(
      "plot-data", "reduce a trace CSV to per-policy regret curves");
  plot->add_option("--trace", trace_path, "trace CSV from `run`")->required();
  plot->add_option("--out", options.output_dir, "output directory");

  auto* validate = app.add_subcommand(
      "validate", "run built-in invariant suites with fixed seeds");
  validate->add_option("suite", suite,
                       "splines|posterior|tmvn|policies|all");

  auto* describe =
      app.add_subcommand("describe", "print the resolved config");
  add_common(describe, true);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return csgp::run_command(options);
  if (plot->parsed()) {
    return csgp::plot_data_command(trace_path, options.output_dir);
  }
  if (validate->parsed()) return csgp::validate_command(suite);
  if (describe->parsed()) return csgp::describe_command(options);
  return 1;
}
