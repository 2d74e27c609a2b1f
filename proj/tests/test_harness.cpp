#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "csgp/environments.hpp"
#include "csgp/harness.hpp"
#include "csgp/rng.hpp"

using namespace csgp;

namespace {

ExperimentConfig desk_config() {
  ExperimentConfig config;
  config.env.type = EnvConfig::Type::kWarfarin;
  config.env.noise_var = 0.1;
  config.T = 6;
  config.n_init = 4;
  config.grid_size = 20;
  config.replications = 2;
  config.base_seed = 99;
  config.refit_cadence = 3;
  config.refit_budget = 4;
  config.sampler.draws = 200;
  config.sampler.burn_in = 50;
  config.kernel.lengthscale = 2.0;
  config.kernel.variance = 10.0;
  for (const char* name : {"csgp_ucb", "sgp_ucb"}) {
    PolicyArm arm;
    arm.name = name;
    arm.config.kind = parse_policy_kind(name);
    arm.config.schedule = config.schedule();
    arm.config.sampler = config.sampler;
    config.policies.push_back(arm);
  }
  return config;
}

bool rows_equal(const TraceRow& a, const TraceRow& b) {
  return a.replication == b.replication && a.policy == b.policy &&
         a.t == b.t && a.context_id == b.context_id && a.action == b.action &&
         a.reward == b.reward && a.inst_regret == b.inst_regret &&
         a.cum_regret == b.cum_regret && a.wall_ms == b.wall_ms;
}

// Cheating policy: selects the grid argmax of the true mean reward.
class OracleRunner : public PolicyRunner {
 public:
  OracleRunner(Environment env, Eigen::VectorXd grid)
      : env_(std::move(env)), grid_(std::move(grid)) {}

  void observe(double, const Eigen::VectorXd&, double) override {}

  Selection select(const Eigen::VectorXd& x_t, int, std::uint64_t) override {
    Selection sel;
    double best = -1e300;
    for (Eigen::Index i = 0; i < grid_.size(); ++i) {
      const double v = env_.reward_fn(grid_[i], x_t);
      if (v > best) {
        best = v;
        sel.index = static_cast<int>(i);
      }
    }
    sel.action = grid_[sel.index];
    return sel;
  }

 private:
  Environment env_;
  Eigen::VectorXd grid_;
};

// Uniform-random policy with a private stream.
class UniformRunner : public PolicyRunner {
 public:
  UniformRunner(Eigen::VectorXd grid, std::uint64_t seed)
      : grid_(std::move(grid)), rng_(seed) {}

  void observe(double, const Eigen::VectorXd&, double) override {}

  Selection select(const Eigen::VectorXd&, int, std::uint64_t) override {
    Selection sel;
    sel.index = rng_.uniform_int(static_cast<int>(grid_.size()));
    sel.action = grid_[sel.index];
    return sel;
  }

 private:
  Eigen::VectorXd grid_;
  Rng rng_;
};

// Records the context stream and observed triples it is fed.
class RecordingRunner : public PolicyRunner {
 public:
  void observe(double a, const Eigen::VectorXd& x, double y) override {
    observed.push_back({x, a, y});
  }
  Selection select(const Eigen::VectorXd& x_t, int, std::uint64_t) override {
    contexts.push_back(x_t);
    Selection sel;
    sel.index = 0;
    sel.action = 0.0;
    return sel;
  }
  std::vector<BanditHistory::Round> observed;
  std::vector<Eigen::VectorXd> contexts;
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("oracle policy incurs at most a grid-step of regret") {
  ExperimentConfig config = desk_config();
  config.T = 1;
  config.n_init = 0;
  config.grid_size = 100;
  OracleRunner oracle(build_environment(config, derive_seed(99, 1)),
                      uniform_grid(100));
  const EpisodeResult result =
      run_episode_with(config, oracle, "oracle", 0, 0);
  REQUIRE(result.rows.size() == 1);
  // Warfarin is quadratic with |f''| = 120: the best grid action sits within
  // half a grid step of the vertex, costing at most 60 (step/2)^2.
  const double step = 1.0 / 99.0;
  CHECK(result.rows[0].inst_regret >= 0.0);
  CHECK(result.rows[0].inst_regret <= 60.0 * step * step);
}

TEST_CASE("uniform policy on a pinned context matches the grid average") {
  // At x = 0 the Warfarin regret of action a is exactly 60 a^2; uniform
  // play should average the grid mean of that curve.
  ExperimentConfig config = desk_config();
  config.T = 400;
  config.n_init = 0;
  config.grid_size = 100;
  config.env.noise_var = 0.1;

  Environment env = make_warfarin_env(0.1);
  env.context_sampler = [](Rng&) { return Eigen::VectorXd::Zero(7); };

  const Eigen::VectorXd grid = uniform_grid(100);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    expected += 60.0 * grid[i] * grid[i] / grid.size();
  }
  CHECK(expected == doctest::Approx(20.10101010101010));

  UniformRunner uniform(grid, 0x123);
  // Run the protocol manually against the pinned-context environment.
  Rng noise(1);
  double total = 0.0;
  for (int t = 1; t <= config.T; ++t) {
    const Eigen::VectorXd x_t = env.context_sampler(noise);
    const Selection sel = uniform.select(x_t, t, 0);
    total += regret(env, sel.action, x_t);
  }
  const double mean_regret = total / config.T;
  // sd of 60 a^2 over the grid is ~17.8; 3 SE at T=400 is ~2.7.
  CHECK(std::abs(mean_regret - expected) <= 2.7);
}

TEST_CASE("episodes are bitwise deterministic given the config") {
  const ExperimentConfig config = desk_config();
  const EpisodeResult r1 = run_episode(config, 0, 0);
  const EpisodeResult r2 = run_episode(config, 0, 0);
  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(rows_equal(r1.rows[i], r2.rows[i]));
  }
  CHECK(r1.gamma_hat == r2.gamma_hat);
}

TEST_CASE("policy arms share contexts and initialization data") {
  const ExperimentConfig config = desk_config();
  RecordingRunner arm0;
  RecordingRunner arm1;
  run_episode_with(config, arm0, "a", 0, 0);
  run_episode_with(config, arm1, "b", 1, 0);

  REQUIRE(arm0.contexts.size() == arm1.contexts.size());
  for (std::size_t i = 0; i < arm0.contexts.size(); ++i) {
    CHECK(arm0.contexts[i] == arm1.contexts[i]);
  }
  // Initialization triples (including rewards) are identical across arms.
  REQUIRE(arm0.observed.size() == arm1.observed.size());
  for (int i = 0; i < config.n_init; ++i) {
    CHECK(arm0.observed[i].context == arm1.observed[i].context);
    CHECK(arm0.observed[i].action == arm1.observed[i].action);
    CHECK(arm0.observed[i].reward == arm1.observed[i].reward);
  }
  // Round rewards differ across arms (private noise streams).
  bool any_reward_differs = false;
  for (std::size_t i = config.n_init; i < arm0.observed.size(); ++i) {
    if (arm0.observed[i].reward != arm1.observed[i].reward) {
      any_reward_differs = true;
    }
  }
  CHECK(any_reward_differs);
}

TEST_CASE("run_experiment aggregates means, SEs, and diagnostics") {
  ExperimentConfig config = desk_config();
  const ExperimentResult result = run_experiment(config);
  CHECK(!result.any_failure);
  REQUIRE(result.summary.policies.size() == 2);
  CHECK(result.trace.rows.size() ==
        static_cast<std::size_t>(2 * 2 * config.T));

  for (const auto& ps : result.summary.policies) {
    REQUIRE(ps.mean_cum_regret.size() == config.T);
    // Mean curve equals the arithmetic mean of per-replication curves.
    for (int t = 1; t <= config.T; ++t) {
      double sum = 0.0;
      int count = 0;
      for (const auto& row : result.trace.rows) {
        if (row.policy == ps.name && row.t == t) {
          sum += row.cum_regret;
          ++count;
        }
      }
      REQUIRE(count == config.replications);
      CHECK(std::abs(ps.mean_cum_regret[t - 1] - sum / count) < 1e-12);
    }
    CHECK(ps.gamma_hat > 0.0);
    CHECK(ps.ucb_bound > 2.0);
    CHECK((ps.bound_satisfaction >= 0.0 && ps.bound_satisfaction <= 1.0));
  }

  // Cumulative regret is the prefix sum of instantaneous regret.
  double running = 0.0;
  for (const auto& row : result.trace.rows) {
    if (row.policy != "csgp_ucb" || row.replication != 0) continue;
    CHECK(row.inst_regret >= 0.0);
    running += row.inst_regret;
    CHECK(row.cum_regret == doctest::Approx(running).epsilon(1e-12));
  }
}

TEST_CASE("single replication produces an all-zero SE curve") {
  ExperimentConfig config = desk_config();
  config.replications = 1;
  config.policies.resize(1);
  const ExperimentResult result = run_experiment(config);
  CHECK(result.summary.policies[0].se_cum_regret.cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("parallel schedule does not change the results") {
  ExperimentConfig config = desk_config();
  config.jobs = 1;
  const ExperimentResult serial = run_experiment(config);
  config.jobs = 2;
  const ExperimentResult parallel = run_experiment(config);
  REQUIRE(serial.trace.rows.size() == parallel.trace.rows.size());
  for (std::size_t i = 0; i < serial.trace.rows.size(); ++i) {
    CHECK(rows_equal(serial.trace.rows[i], parallel.trace.rows[i]));
  }
  for (std::size_t p = 0; p < serial.summary.policies.size(); ++p) {
    CHECK(serial.summary.policies[p].mean_cum_regret ==
          parallel.summary.policies[p].mean_cum_regret);
  }
}

TEST_CASE("wall clock is zero unless explicitly recorded") {
  ExperimentConfig config = desk_config();
  config.T = 2;
  config.replications = 1;
  config.policies.resize(1);
  const ExperimentResult off = run_experiment(config);
  for (const auto& row : off.trace.rows) CHECK(row.wall_ms == 0.0);

  config.record_wall_ms = true;
  const ExperimentResult on = run_experiment(config);
  double total = 0.0;
  for (const auto& row : on.trace.rows) total += row.wall_ms;
  CHECK(total > 0.0);
}

TEST_CASE("info gain: scalar value, monotonicity, large-noise limit") {
  // Constant-feature-only kernel evaluated at a = 0 has kf == variance == 1.
  BaseKernelSpec base;
  CSGPKernel kernel = make_csgp_kernel(build_basis(1, 1), base);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  const std::vector<ActionContext> one = {{0.0, x}};
  CHECK(info_gain(kernel, one, 1.0) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));

  Rng rng(5);
  std::vector<ActionContext> pts;
  double prev = 0.0;
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd xi(2);
    xi << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    pts.push_back({rng.uniform01(), xi});
    const double gain = info_gain(kernel, pts, 0.1);
    CHECK(gain >= prev - 1e-9);
    prev = gain;
  }
  CHECK(info_gain(kernel, pts, 1e9) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("regret bound constants") {
  // C1 = 8 / log(1 + 1/0.1) = 8 / log(11).
  const double c1 = 8.0 / std::log(11.0);
  CHECK(c1 == doctest::Approx(3.3362591314).epsilon(1e-9));
  CHECK(ucb_regret_bound(0.0, 10.0, 5.0, 0.1) == 2.0);
  const double b = ucb_regret_bound(100.0, 10.0, 5.0, 0.1);
  CHECK(b == doctest::Approx(std::sqrt(c1 * 100.0 * 10.0 * 5.0) + 2.0));
  // Monotone in every argument.
  CHECK(ucb_regret_bound(200.0, 10.0, 5.0, 0.1) > b);
  CHECK(ucb_regret_bound(100.0, 20.0, 5.0, 0.1) > b);
  CHECK(ucb_regret_bound(100.0, 10.0, 9.0, 0.1) > b);

  const double ts = ts_regret_bound(100.0, 10.0, 5.0, 0.1, 9.0);
  CHECK(ts == doctest::Approx(9.0 + 2.0 * std::sqrt(100.0 * 5.0 *
                                                    std::log(11.0) * 10.0)));
}

TEST_CASE("trace CSV round trip") {
  ExperimentConfig config = desk_config();
  config.T = 3;
  config.replications = 1;
  const ExperimentResult result = run_experiment(config);

  const std::string path =
      (std::filesystem::temp_directory_path() / "csgp_trace_test.csv")
          .string();
  write_trace_csv(path, result.trace);
  const RegretTrace loaded = read_trace_csv(path);
  REQUIRE(loaded.rows.size() == result.trace.rows.size());
  for (std::size_t i = 0; i < loaded.rows.size(); ++i) {
    CHECK(rows_equal(loaded.rows[i], result.trace.rows[i]));
  }
  std::filesystem::remove(path);
}

TEST_CASE("config validation rejects malformed experiments") {
  ExperimentConfig config = desk_config();
  config.T = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = desk_config();
  config.grid_size = 1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = desk_config();
  config.delta = 1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = desk_config();
  config.policies.clear();
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

}  // TEST_SUITE
