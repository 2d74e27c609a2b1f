#include "csgp/harness.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csgp/errors.hpp"
#include "csgp/linalg.hpp"

namespace csgp {

void ExperimentConfig::validate() const {
  if (T < 1) throw ConfigError("experiment.T must be >= 1");
  if (replications < 1) throw ConfigError("experiment.replications must be >= 1");
  if (grid_size < 2) throw ConfigError("experiment.grid_size must be >= 2");
  if (n_init < 0) throw ConfigError("experiment.n_init must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("experiment.delta must lie in (0, 1)");
  }
  if (refit_cadence < 1) throw ConfigError("experiment.refit_cadence must be >= 1");
  if (refit_budget < 0) throw ConfigError("experiment.refit_budget must be >= 0");
  if (conditioning_window < 1) {
    throw ConfigError("experiment.conditioning_window must be >= 1");
  }
  if (policies.empty()) throw ConfigError("at least one policy required");
  if (!(env.noise_var > 0.0)) throw ConfigError("env.noise_var must be > 0");
  if (sampler.draws < 1 || sampler.burn_in < 0) {
    throw ConfigError("sampler.draws must be >= 1 and burn_in >= 0");
  }
  kernel.validate();
  build_basis(num_interior_knots, order_k);  // validates the basis knobs
  if (env.type == EnvConfig::Type::kSynthetic) {
    if (env.d < 1) throw ConfigError("env.d must be >= 1");
    if (env.S < 0) throw ConfigError("env.S must be >= 0");
    if (!(env.theta > 0.0)) throw ConfigError("env.theta must be > 0");
    if (!(env.action_lengthscale > 0.0)) {
      throw ConfigError("env.action_lengthscale must be > 0");
    }
    if (env.fine_grid_size < 2) {
      throw ConfigError("env.fine_grid_size must be >= 2");
    }
  }
  if (env.optimum_grid_size < 2) {
    throw ConfigError("env.optimum_grid_size must be >= 2");
  }
}

AlphaSchedule ExperimentConfig::schedule() const {
  AlphaSchedule s;
  s.variant = alpha_variant;
  s.delta = delta;
  s.action_count = grid_size;
  s.eta = eta;
  s.zeta = zeta;
  return s;
}

Environment build_environment(const ExperimentConfig& config,
                              std::uint64_t structural_seed) {
  if (config.env.type == EnvConfig::Type::kWarfarin) {
    return make_warfarin_env(config.env.noise_var,
                             config.env.optimum_grid_size);
  }
  SyntheticSpec spec;
  spec.d = config.env.d;
  spec.theta = config.env.theta;
  spec.S = config.env.S;
  spec.fine_grid_size = config.env.fine_grid_size;
  spec.noise_var = config.env.noise_var;
  spec.action_lengthscale = config.env.action_lengthscale;
  spec.optimum_grid_size = config.env.optimum_grid_size;
  spec.seed = derive_seed(structural_seed, config.env.seed);
  return synthetic_generate(spec);
}

namespace {

// Seed stream tags; all per-episode randomness derives from these. The
// environment/context/init streams depend only on the replication, so policy
// arms within a replication face the same function and context sequence;
// round noise is a per-arm stream.
constexpr std::uint64_t kTagReplication = 0x5EED;
constexpr std::uint64_t kTagEnv = 1;
constexpr std::uint64_t kTagContexts = 2;
constexpr std::uint64_t kTagInitActions = 3;
constexpr std::uint64_t kTagInitNoise = 4;

class SplineRunner : public PolicyRunner {
 public:
  SplineRunner(const ExperimentConfig& config, const PolicyArm& arm,
               Eigen::VectorXd grid)
      : cfg_(arm.config),
        grid_(std::move(grid)),
        window_(config.conditioning_window),
        post_(make_csgp_kernel(
                  build_basis(config.num_interior_knots, config.order_k),
                  config.kernel, config.tied),
              config.env.noise_var) {}

  void observe(double a, const Eigen::VectorXd& x, double y) override {
    post_.append(a, x, y);
  }

  Selection select(const Eigen::VectorXd& x_t, int t,
                   std::uint64_t seed) override {
    const double alpha_t = cfg_.alpha_override
                               ? *cfg_.alpha_override
                               : alpha(cfg_.schedule, t);
    switch (cfg_.kind) {
      case PolicyKind::kCsgpUcb:
        return csgp_ucb_from_posterior(post_, x_t, grid_, alpha_t,
                                       cfg_.sampler, seed, window_);
      case PolicyKind::kCsgpTs:
        return csgp_ts_from_posterior(post_, x_t, grid_, cfg_.sampler, seed,
                                      window_);
      case PolicyKind::kSgpUcb:
        return sgp_ucb_from_posterior(post_, x_t, grid_, alpha_t, seed);
      case PolicyKind::kSgpTs:
        return sgp_ts_from_posterior(post_, x_t, grid_, seed);
      default:
        throw ConfigError("SplineRunner: not a spline-model policy");
    }
  }

  void refit(int budget, std::uint64_t seed) override {
    if (budget <= 0 || post_.size() < 2) return;
    const CSGPKernel fitted = fit_hyperparams(
        post_.kernel(), post_.noise_var(), post_.history(), budget, seed);
    post_.reset_kernel(fitted);
  }

  double gamma_hat() const override {
    if (post_.points().empty()) return 0.0;
    return info_gain(post_.kernel(), post_.points(), post_.noise_var());
  }

  double fitted_lengthscale() const override {
    return post_.kernel().components.front().lengthscale;
  }
  double fitted_variance() const override {
    return post_.kernel().components.front().variance;
  }

 private:
  PolicyConfig cfg_;
  Eigen::VectorXd grid_;
  int window_;
  RewardPosterior post_;
};

class JointGpRunner : public PolicyRunner {
 public:
  JointGpRunner(const ExperimentConfig& config, const PolicyArm& arm,
                Eigen::VectorXd grid)
      : cfg_(arm.config),
        grid_(std::move(grid)),
        post_(config.kernel, config.env.noise_var) {}

  void observe(double a, const Eigen::VectorXd& x, double y) override {
    post_.append(a, x, y);
  }

  Selection select(const Eigen::VectorXd& x_t, int t,
                   std::uint64_t seed) override {
    const double alpha_t = cfg_.alpha_override
                               ? *cfg_.alpha_override
                               : alpha(cfg_.schedule, t);
    if (cfg_.kind == PolicyKind::kGpUcb) {
      return gp_ucb_from_posterior(post_, x_t, grid_, alpha_t);
    }
    return gp_ts_from_posterior(post_, x_t, grid_, seed);
  }

  void refit(int budget, std::uint64_t seed) override {
    if (budget <= 0 || post_.size() < 2) return;
    const BaseKernelSpec fitted =
        fit_base_hyperparams(post_.kernel(), post_.noise_var(), post_.points(),
                             post_.rewards(), budget, seed);
    post_.reset_kernel(fitted);
  }

  double gamma_hat() const override {
    if (post_.size() == 0) return 0.0;
    return base_info_gain(post_.kernel(), post_.points(), post_.noise_var());
  }

  double fitted_lengthscale() const override {
    return post_.kernel().lengthscale;
  }
  double fitted_variance() const override { return post_.kernel().variance; }

 private:
  PolicyConfig cfg_;
  Eigen::VectorXd grid_;
  JointGpPosterior post_;
};

}  // namespace

std::unique_ptr<PolicyRunner> make_policy_runner(
    const ExperimentConfig& config, const PolicyArm& arm,
    const Eigen::VectorXd& grid) {
  if (policy_uses_spline_model(arm.config.kind)) {
    return std::make_unique<SplineRunner>(config, arm, grid);
  }
  return std::make_unique<JointGpRunner>(config, arm, grid);
}

EpisodeResult run_episode_with(const ExperimentConfig& config,
                               PolicyRunner& runner,
                               const std::string& policy_label,
                               int arm_index, int replication) {
  const std::uint64_t rep_root =
      derive_seed(config.base_seed, kTagReplication + replication);
  const std::uint64_t arm_tag = 100 + static_cast<std::uint64_t>(arm_index);
  const std::uint64_t policy_stream = derive_seed(rep_root, arm_tag);

  Environment env =
      build_environment(config, derive_seed(rep_root, kTagEnv));
  const Eigen::VectorXd grid = uniform_grid(config.grid_size);

  Rng ctx_rng(derive_seed(rep_root, kTagContexts));
  Rng init_action_rng(derive_seed(rep_root, kTagInitActions));
  Rng init_noise_rng(derive_seed(rep_root, kTagInitNoise));
  Rng noise_rng(derive_seed(rep_root, 5000 + arm_tag));

  EpisodeResult result;

  // Initialization: contexts from the environment, actions uniform on the
  // grid, shared across policy arms through common seeding.
  for (int i = 0; i < config.n_init; ++i) {
    const Eigen::VectorXd x = env.context_sampler(ctx_rng);
    const double a = grid[init_action_rng.uniform_int(config.grid_size)];
    const double y = observe(env, a, x, init_noise_rng);
    runner.observe(a, x, y);
  }
  runner.refit(config.refit_budget, derive_seed(policy_stream, 0xF17));

  double cum = 0.0;
  result.rows.reserve(static_cast<std::size_t>(config.T));
  for (int t = 1; t <= config.T; ++t) {
    const Eigen::VectorXd x_t = env.context_sampler(ctx_rng);
    const auto start = std::chrono::steady_clock::now();
    const Selection sel =
        runner.select(x_t, t, derive_seed(policy_stream, t));
    const double y = observe(env, sel.action, x_t, noise_rng);
    runner.observe(sel.action, x_t, y);
    const double r = regret(env, sel.action, x_t);
    const auto stop = std::chrono::steady_clock::now();
    cum += r;

    TraceRow row;
    row.replication = replication;
    row.policy = policy_label;
    row.t = t;
    row.context_id = t;
    row.action = sel.action;
    row.reward = y;
    row.inst_regret = r;
    row.cum_regret = cum;
    row.wall_ms =
        config.record_wall_ms
            ? std::chrono::duration<double, std::milli>(stop - start).count()
            : 0.0;
    result.rows.push_back(std::move(row));

    if (t % config.refit_cadence == 0 && t < config.T) {
      runner.refit(config.refit_budget,
                   derive_seed(policy_stream, 0xF17000 + t));
    }
  }
  result.final_cum_regret = cum;
  result.gamma_hat = runner.gamma_hat();
  result.fitted_lengthscale = runner.fitted_lengthscale();
  result.fitted_variance = runner.fitted_variance();
  return result;
}

EpisodeResult run_episode(const ExperimentConfig& config, int arm_index,
                          int replication) {
  const PolicyArm& arm = config.policies[static_cast<std::size_t>(arm_index)];
  const auto runner =
      make_policy_runner(config, arm, uniform_grid(config.grid_size));
  return run_episode_with(config, *runner, arm.name, arm_index, replication);
}

double info_gain(const CSGPKernel& kernel,
                 const std::vector<ActionContext>& points, double noise_var) {
  if (points.empty()) throw DomainError("info_gain: empty point list");
  Eigen::MatrixXd m = gram(kernel, points) / noise_var;
  m.diagonal().array() += 1.0;
  return 0.5 * cholesky_logdet(jittered_cholesky(m));
}

double base_info_gain(const BaseKernelSpec& kernel,
                      const Eigen::MatrixXd& points, double noise_var) {
  if (points.rows() == 0) throw DomainError("base_info_gain: empty points");
  Eigen::MatrixXd m = base_gram(kernel, points) / noise_var;
  m.diagonal().array() += 1.0;
  return 0.5 * cholesky_logdet(jittered_cholesky(m));
}

double ucb_regret_bound(double T, double alpha_T, double gamma_hat,
                        double noise_var) {
  const double c1 = 8.0 / std::log(1.0 + 1.0 / noise_var);
  return std::sqrt(c1 * T * alpha_T * gamma_hat) + 2.0;
}

double ts_regret_bound(double T, double alpha_T, double gamma_hat,
                       double noise_var, double c_sigma) {
  return c_sigma +
         2.0 * std::sqrt(T * gamma_hat * std::log(1.0 + 1.0 / noise_var) *
                         alpha_T);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  Eigen::setNbThreads(1);  // parallelism lives at the replication level

  const int n_arms = static_cast<int>(config.policies.size());
  const int n_reps = config.replications;
  std::vector<EpisodeResult> episodes(
      static_cast<std::size_t>(n_arms * n_reps));

  const int jobs = config.jobs > 0 ? config.jobs : omp_get_max_threads();
#pragma omp parallel for collapse(2) schedule(dynamic) num_threads(jobs)
  for (int arm = 0; arm < n_arms; ++arm) {
    for (int rep = 0; rep < n_reps; ++rep) {
      auto& slot = episodes[static_cast<std::size_t>(arm * n_reps + rep)];
      try {
        slot = run_episode(config, arm, rep);
      } catch (const std::exception& e) {
        slot.failed = true;
        slot.error = e.what();
      }
    }
  }

  ExperimentResult out;
  const double alpha_T = alpha(config.schedule(), config.T);
  out.summary.alpha_T = alpha_T;
  out.summary.c_sigma =
      config.kernel.variance *
      (config.num_interior_knots + config.order_k + 2);

  // Deterministic row order: replication, then policy, then round.
  for (int rep = 0; rep < n_reps; ++rep) {
    for (int arm = 0; arm < n_arms; ++arm) {
      const auto& ep = episodes[static_cast<std::size_t>(arm * n_reps + rep)];
      if (ep.failed) continue;
      out.trace.rows.insert(out.trace.rows.end(), ep.rows.begin(),
                            ep.rows.end());
    }
  }

  for (int arm = 0; arm < n_arms; ++arm) {
    PolicySummary ps;
    ps.name = config.policies[static_cast<std::size_t>(arm)].name;
    ps.mean_cum_regret = Eigen::VectorXd::Zero(config.T);
    ps.se_cum_regret = Eigen::VectorXd::Zero(config.T);

    std::vector<const EpisodeResult*> ok;
    for (int rep = 0; rep < n_reps; ++rep) {
      const auto& ep = episodes[static_cast<std::size_t>(arm * n_reps + rep)];
      if (ep.failed) {
        out.summary.failures.push_back(
            EpisodeFailure{rep, ps.name, ep.error});
        out.any_failure = true;
        continue;
      }
      ok.push_back(&ep);
      ps.rep_gamma_hat.push_back(ep.gamma_hat);
      ps.rep_final_regret.push_back(ep.final_cum_regret);
      ps.rep_lengthscale.push_back(ep.fitted_lengthscale);
      ps.rep_variance.push_back(ep.fitted_variance);
    }

    const int n_ok = static_cast<int>(ok.size());
    if (n_ok > 0) {
      Eigen::MatrixXd curves(n_ok, config.T);
      for (int r = 0; r < n_ok; ++r) {
        for (int t = 0; t < config.T; ++t) {
          curves(r, t) = ok[static_cast<std::size_t>(r)]
                             ->rows[static_cast<std::size_t>(t)]
                             .cum_regret;
        }
      }
      ps.mean_cum_regret = curves.colwise().mean();
      if (n_ok > 1) {
        for (int t = 0; t < config.T; ++t) {
          const double var =
              (curves.col(t).array() - ps.mean_cum_regret[t]).square().sum() /
              (n_ok - 1);
          ps.se_cum_regret[t] = std::sqrt(var / n_ok);
        }
      }
      double gamma_sum = 0.0;
      int bound_ok = 0;
      for (int r = 0; r < n_ok; ++r) {
        gamma_sum += ps.rep_gamma_hat[static_cast<std::size_t>(r)];
        const double bound = ucb_regret_bound(
            config.T, alpha_T, ps.rep_gamma_hat[static_cast<std::size_t>(r)],
            config.env.noise_var);
        if (ps.rep_final_regret[static_cast<std::size_t>(r)] <= bound) {
          ++bound_ok;
        }
      }
      ps.gamma_hat = gamma_sum / n_ok;
      ps.bound_satisfaction = static_cast<double>(bound_ok) / n_ok;
      ps.ucb_bound = ucb_regret_bound(config.T, alpha_T, ps.gamma_hat,
                                      config.env.noise_var);
      ps.ts_bound = ts_regret_bound(config.T, alpha_T, ps.gamma_hat,
                                    config.env.noise_var,
                                    out.summary.c_sigma);
    }
    out.summary.policies.push_back(std::move(ps));
  }
  return out;
}

namespace {

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace

void write_trace_csv(const std::string& path, const RegretTrace& trace) {
  std::string out;
  out.reserve(trace.rows.size() * 96 + 80);
  out += "replication,policy,t,context_id,action,reward,inst_regret,"
         "cum_regret,wall_ms\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.replication);
    out += ',';
    out += r.policy;
    out += ',';
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.context_id);
    out += ',';
    out += format17(r.action);
    out += ',';
    out += format17(r.reward);
    out += ',';
    out += format17(r.inst_regret);
    out += ',';
    out += format17(r.cum_regret);
    out += ',';
    out += format17(r.wall_ms);
    out += '\n';
  }
  atomic_write(path, out);
}

RegretTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty trace file: " + path);
  if (line !=
      "replication,policy,t,context_id,action,reward,inst_regret,"
      "cum_regret,wall_ms") {
    throw Error("unexpected trace header in " + path);
  }
  RegretTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TraceRow row;
    std::getline(ss, field, ',');
    row.replication = std::stoi(field);
    std::getline(ss, row.policy, ',');
    std::getline(ss, field, ',');
    row.t = std::stoi(field);
    std::getline(ss, field, ',');
    row.context_id = std::stoi(field);
    std::getline(ss, field, ',');
    row.action = std::stod(field);
    std::getline(ss, field, ',');
    row.reward = std::stod(field);
    std::getline(ss, field, ',');
    row.inst_regret = std::stod(field);
    std::getline(ss, field, ',');
    row.cum_regret = std::stod(field);
    if (!std::getline(ss, field, ',')) {
      throw Error("malformed trace row: " + line);
    }
    row.wall_ms = std::stod(field);
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

}  // namespace csgp
