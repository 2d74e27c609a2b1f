#ifndef CSGP_HARNESS_HPP_
#define CSGP_HARNESS_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csgp/environments.hpp"
#include "csgp/policies.hpp"

namespace csgp {

struct EnvConfig {
  enum class Type { kWarfarin, kSynthetic };
  Type type = Type::kWarfarin;
  int d = 5;
  double theta = 1.0;
  int S = 10;
  double noise_var = 0.1;
  std::uint64_t seed = 0;
  int fine_grid_size = 200;
  int optimum_grid_size = 1000;
  double action_lengthscale = 0.6;  // synthetic h_s kernel
};

struct PolicyArm {
  PolicyConfig config;
  std::string name;
};

struct ExperimentConfig {
  EnvConfig env;
  std::vector<PolicyArm> policies;
  int T = 100;
  int n_init = 25;
  int grid_size = 100;
  int replications = 1;
  std::uint64_t base_seed = 1;
  double delta = 0.1;
  int refit_cadence = 25;
  int refit_budget = 40;
  int conditioning_window = 1;  // W past contexts in the truncated posterior
  SamplerConfig sampler;
  BaseKernelSpec kernel;  // initial hyperparameters for all GP models
  bool tied = true;
  int num_interior_knots = 5;
  int order_k = 2;
  AlphaSchedule::Variant alpha_variant = AlphaSchedule::Variant::kDiscrete;
  double eta = 1.0;
  double zeta = 1.0;
  bool record_wall_ms = false;   // trace wall clock (breaks bitwise reruns)
  bool dump_diagnostics = false; // per-round posterior summaries (JSONL)
  std::string trace_filename = "trace.csv";
  std::string summary_filename = "summary.json";
  int jobs = 0;  // replication parallelism; 0 = OpenMP default

  void validate() const;
  AlphaSchedule schedule() const;
};

Environment build_environment(const ExperimentConfig& config,
                              std::uint64_t structural_seed);

struct TraceRow {
  int replication = 0;
  std::string policy;
  int t = 0;
  int context_id = 0;
  double action = 0.0;
  double reward = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double wall_ms = 0.0;
};

struct RegretTrace {
  std::vector<TraceRow> rows;
};

// Episode-scoped policy state: accumulates observations, selects actions,
// refits hyperparameters on cadence. Tests may plug in custom runners
// (e.g. an oracle) through run_episode_with.
class PolicyRunner {
 public:
  virtual ~PolicyRunner() = default;
  virtual void observe(double a, const Eigen::VectorXd& x, double y) = 0;
  virtual Selection select(const Eigen::VectorXd& x_t, int t,
                           std::uint64_t seed) = 0;
  virtual void refit(int budget, std::uint64_t seed) {
    (void)budget;
    (void)seed;
  }
  // Empirical information gain of the visited points under the runner's
  // (final) model; 0 when the runner has no GP model.
  virtual double gamma_hat() const { return 0.0; }
  virtual double fitted_lengthscale() const { return 0.0; }
  virtual double fitted_variance() const { return 0.0; }
};

std::unique_ptr<PolicyRunner> make_policy_runner(
    const ExperimentConfig& config, const PolicyArm& arm,
    const Eigen::VectorXd& grid);

struct EpisodeResult {
  std::vector<TraceRow> rows;
  double gamma_hat = 0.0;
  double final_cum_regret = 0.0;
  double fitted_lengthscale = 0.0;
  double fitted_variance = 0.0;
  bool failed = false;
  std::string error;
};

EpisodeResult run_episode(const ExperimentConfig& config, int arm_index,
                          int replication);

// Same protocol with a caller-supplied runner (testing hook).
EpisodeResult run_episode_with(const ExperimentConfig& config,
                               PolicyRunner& runner,
                               const std::string& policy_label,
                               int arm_index, int replication);

struct PolicySummary {
  std::string name;
  Eigen::VectorXd mean_cum_regret;  // length T, mean across replications
  Eigen::VectorXd se_cum_regret;    // SE across replications at each t
  double gamma_hat = 0.0;           // mean of per-replication values
  double ucb_bound = 0.0;
  double ts_bound = 0.0;
  double bound_satisfaction = 0.0;  // fraction of reps with R_T <= UCB bound
  std::vector<double> rep_gamma_hat;
  std::vector<double> rep_final_regret;
  std::vector<double> rep_lengthscale;
  std::vector<double> rep_variance;
};

struct EpisodeFailure {
  int replication = 0;
  std::string policy;
  std::string error;
};

struct Summary {
  std::vector<PolicySummary> policies;
  std::vector<EpisodeFailure> failures;
  double alpha_T = 0.0;
  double c_sigma = 0.0;
};

struct ExperimentResult {
  RegretTrace trace;
  Summary summary;
  bool any_failure = false;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Mutual information 1/2 log det(I + noise^-1 K) of the visited points.
double info_gain(const CSGPKernel& kernel,
                 const std::vector<ActionContext>& points, double noise_var);
double base_info_gain(const BaseKernelSpec& kernel,
                      const Eigen::MatrixXd& points, double noise_var);

// High-probability UCB ceiling sqrt(C1 T alpha_T gamma) + 2 with
// C1 = 8 / log(1 + noise^-2), and the Thompson Bayes-regret ceiling
// C_sigma + 2 sqrt(T gamma log(1 + noise^-2) alpha_T).
double ucb_regret_bound(double T, double alpha_T, double gamma_hat,
                        double noise_var);
double ts_regret_bound(double T, double alpha_T, double gamma_hat,
                       double noise_var, double c_sigma);

// Trace CSV: fixed header, 17 significant digits, LF endings, atomic write.
void write_trace_csv(const std::string& path, const RegretTrace& trace);
RegretTrace read_trace_csv(const std::string& path);

}  // namespace csgp

#endif  // CSGP_HARNESS_HPP_
