#include "csgp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "csgp/config.hpp"
#include "csgp/errors.hpp"
#include "csgp/report.hpp"
#include "csgp/validation.hpp"

namespace csgp {

namespace {

namespace fs = std::filesystem;

ExperimentConfig resolve_config(const CliOptions& options) {
  ExperimentConfig config = load_config(options.config_path,
                                        options.overrides);
  if (options.seed) config.base_seed = *options.seed;
  if (options.jobs) config.jobs = *options.jobs;
  return config;
}

}  // namespace

int run_command(const CliOptions& options) {
  ExperimentConfig config;
  try {
    config = resolve_config(options);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (options.verbosity >= 1) {
      std::cout << "running " << config.policies.size() << " policies x "
                << config.replications << " replications, T = " << config.T
                << "\n";
    }
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult result = run_experiment(config);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    const fs::path out_dir(options.output_dir);
    const std::string trace_path = (out_dir / config.trace_filename).string();
    const std::string summary_path =
        (out_dir / config.summary_filename).string();
    write_trace_csv(trace_path, result.trace);
    write_summary_json(summary_path, result.summary, config_to_json(config));

    if (options.verbosity >= 1) {
      for (const auto& ps : result.summary.policies) {
        const double final_mean =
            ps.mean_cum_regret.size() > 0
                ? ps.mean_cum_regret[ps.mean_cum_regret.size() - 1]
                : 0.0;
        std::printf("%-10s R_T = %10.3f +- %.3f   gamma_hat = %.2f\n",
                    ps.name.c_str(), final_mean,
                    ps.se_cum_regret.size() > 0
                        ? ps.se_cum_regret[ps.se_cum_regret.size() - 1]
                        : 0.0,
                    ps.gamma_hat);
      }
      std::printf("wrote %s and %s in %.1f s\n", trace_path.c_str(),
                  summary_path.c_str(), secs);
    }
    for (const auto& f : result.summary.failures) {
      std::cerr << "episode failed: replication " << f.replication
                << " policy " << f.policy << ": " << f.error << "\n";
    }
    return result.any_failure ? 2 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int plot_data_command(const std::string& trace_path,
                      const std::string& output_dir) {
  try {
    const RegretTrace trace = read_trace_csv(trace_path);
    const auto files = write_curve_csvs(output_dir, trace);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "plot-data error: " << e.what() << "\n";
    return 1;
  }
}

int validate_command(const std::string& suite) {
  std::vector<CheckResult> results;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (suite == "splines") {
      results = validate_splines();
    } else if (suite == "posterior") {
      results = validate_posterior();
    } else if (suite == "tmvn") {
      results = validate_tmvn();
    } else if (suite == "policies") {
      results = validate_policies();
    } else if (suite == "all") {
      results = validate_all();
    } else {
      std::cerr << "unknown suite: " << suite
                << " (expected splines|posterior|tmvn|policies|all)\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "validate error: " << e.what() << "\n";
    return 1;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  int failed = 0;
  for (const auto& r : results) {
    std::printf("%-10s %-45s %s%s%s\n", r.suite.c_str(), r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.detail.empty() ? "" : "  ",
                r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%zu checks, %d failed (%.1f s)\n", results.size(), failed,
              secs);
  return failed == 0 ? 0 : 1;
}

int describe_command(const CliOptions& options) {
  try {
    const ExperimentConfig config = resolve_config(options);
    nlohmann::json j = config_to_json(config);
    const SplineBasisSpec basis =
        build_basis(config.num_interior_knots, config.order_k);
    j["derived"] = {
        {"num_mspline", basis.num_mspline},
        {"J", basis.J},
        {"alpha_1", alpha(config.schedule(), 1)},
        {"alpha_T", alpha(config.schedule(), config.T)},
        {"noise_sd", std::sqrt(config.env.noise_var)},
    };
    std::cout << j.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace csgp
