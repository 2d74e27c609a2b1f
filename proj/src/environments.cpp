#include "csgp/environments.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "csgp/errors.hpp"
#include "csgp/kernel.hpp"
#include "csgp/linalg.hpp"
#include "csgp/piecewise.hpp"
#include "csgp/truncated_mvn.hpp"

namespace csgp {

Eigen::VectorXd uniform_grid(int size) {
  if (size < 2) throw DomainError("uniform_grid: need at least 2 points");
  return Eigen::VectorXd::LinSpaced(size, 0.0, 1.0);
}

double warfarin_eval(double a, const Eigen::VectorXd& x) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("warfarin_eval: action outside [0, 1]");
  }
  if (x.size() != 7) {
    throw DimensionError("warfarin_eval: context must be 7-dimensional");
  }
  for (Eigen::Index i = 0; i < 7; ++i) {
    if (!(x[i] >= -1.0 && x[i] <= 1.0)) {
      throw DomainError("warfarin_eval: context outside [-1, 1]^7");
    }
  }
  double g = -0.6 + x[3] * x[3] + 0.5 * std::log(std::abs(x[6]) + 1.0);
  if (x[0] >= -0.5 && x[0] <= 0.5) {
    g += 0.6;
  } else {
    g += 1.2;
  }
  const double miss = g - 2.0 * a;
  return 8.0 + 4.0 * std::cos(2.0 * M_PI * x[1]) - 2.0 * x[2] -
         8.0 * x[4] * x[4] * x[4] - 15.0 * miss * miss;
}

Environment make_warfarin_env(double noise_var, int optimum_grid_size) {
  Environment env;
  env.dim = 7;
  env.name = "warfarin";
  env.noise_sd = std::sqrt(noise_var);
  env.optimum_grid = uniform_grid(optimum_grid_size);
  env.context_sampler = [](Rng& rng) {
    Eigen::VectorXd x(7);
    for (int i = 0; i < 7; ++i) x[i] = rng.uniform(-1.0, 1.0);
    return x;
  };
  env.reward_fn = warfarin_eval;
  return env;
}

namespace {

// GP draw materialized lazily over the context stream: each new context is
// conditioned on every previously materialized value. Values are cached by
// the exact bit pattern of the context, so paired episodes that visit the
// same contexts in the same order reproduce the same function.
class LazyGpSampler {
 public:
  LazyGpSampler(double lengthscale, double variance, std::uint64_t seed)
      : rng_(seed) {
    kernel_.family = KernelFamily::kGaussian;
    kernel_.lengthscale = lengthscale;
    kernel_.variance = variance;
  }

  double value(const Eigen::VectorXd& x) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::string key(reinterpret_cast<const char*>(x.data()),
                          static_cast<std::size_t>(x.size()) *
                              sizeof(double));
    const auto it = index_.find(key);
    if (it != index_.end()) return vals_[it->second];

    const double nugget = 1e-10 * kernel_.variance;
    double mean = 0.0;
    double var = kernel_.variance + nugget;
    Eigen::VectorXd cross(n_);
    if (n_ > 0) {
      for (Eigen::Index i = 0; i < n_; ++i) {
        cross[i] = base_kernel_eval(kernel_, x, xs_.row(i).transpose());
      }
      const Eigen::VectorXd cached_vals = vals_.head(n_);
      mean = cross.dot(chol_.solve(cached_vals));
      var -= chol_.forward_solve(cross).squaredNorm();
    }
    const double draw =
        mean + std::sqrt(std::max(var, 0.0)) * rng_.normal();

    chol_.append(cross, kernel_.variance + nugget);
    xs_.conservativeResize(n_ + 1, x.size());
    xs_.row(n_) = x.transpose();
    vals_.conservativeResize(n_ + 1);
    vals_[n_] = draw;
    index_.emplace(key, n_);
    ++n_;
    return draw;
  }

 private:
  BaseKernelSpec kernel_;
  Rng rng_;
  std::mutex mu_;
  Eigen::MatrixXd xs_;
  Eigen::VectorXd vals_;
  Eigen::Index n_ = 0;
  IncrementalCholesky chol_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

// Smooth concave function on [0, 1]: a GP draw of (h, h'') with h'' <= 0
// enforced at every grid point, reconstructed by integrating the sampled
// curvature track twice. The piecewise-linear interpolant of the sampled
// h'' values is <= 0 everywhere, so the reconstruction is concave on all of
// [0, 1], not just at the grid.
PiecewisePoly sample_concave_function(int grid_size, double lengthscale,
                                      std::uint64_t seed) {
  const Eigen::Index g = grid_size;
  const Eigen::VectorXd grid = uniform_grid(grid_size);
  const double l2 = lengthscale * lengthscale;

  Eigen::MatrixXd cov(2 * g, 2 * g);
  for (Eigen::Index i = 0; i < g; ++i) {
    for (Eigen::Index j = 0; j < g; ++j) {
      const double r = grid[i] - grid[j];
      const double r2 = r * r;
      const double base = std::exp(-0.5 * r2 / l2);
      const double d2 = (r2 / (l2 * l2) - 1.0 / l2) * base;
      const double d4 =
          (3.0 / (l2 * l2) - 6.0 * r2 / (l2 * l2 * l2) +
           r2 * r2 / (l2 * l2 * l2 * l2)) *
          base;
      cov(i, j) = base;          // cov(h, h)
      cov(i, g + j) = d2;        // cov(h, h'')
      cov(g + i, j) = d2;
      cov(g + i, g + j) = d4;    // cov(h'', h'')
    }
  }

  TruncatedGaussian tg;
  tg.mean = Eigen::VectorXd::Zero(2 * g);
  tg.cov = cov;
  tg.upper.resize(2 * g);
  tg.upper.head(g).setConstant(std::numeric_limits<double>::infinity());
  tg.upper.tail(g).setConstant(0.0);

  const SampleBatch batch = ess_sample(tg, 1, /*burn_in=*/600, seed);
  const Eigen::VectorXd h = batch.draws.row(0).head(g).transpose();
  const Eigen::VectorXd h2 = batch.draws.row(0).tail(g).transpose();

  std::vector<double> breaks(static_cast<std::size_t>(g));
  for (Eigen::Index i = 0; i < g; ++i) {
    breaks[static_cast<std::size_t>(i)] = grid[i];
  }
  PiecewisePoly curve =
      piecewise_linear(breaks, h2).antiderivative().antiderivative();
  // Anchor the free linear part to the sampled endpoint values.
  const double alpha0 = h[0];
  const double beta0 = h[g - 1] - h[0] - curve.eval(1.0);
  for (Eigen::Index i = 0; i < curve.coeffs.rows(); ++i) {
    curve.coeffs(i, 0) += alpha0 + beta0 * breaks[static_cast<std::size_t>(i)];
    curve.coeffs(i, 1) += beta0;
  }
  return curve;
}

}  // namespace

Environment synthetic_generate(const SyntheticSpec& spec) {
  if (spec.d < 1) throw DomainError("synthetic_generate: d must be >= 1");
  if (spec.S < 0) throw DomainError("synthetic_generate: S must be >= 0");
  if (!(spec.theta > 0.0)) {
    throw DomainError("synthetic_generate: theta must be > 0");
  }

  Environment env;
  env.dim = spec.d;
  env.name = "synthetic";
  env.noise_sd = std::sqrt(spec.noise_var);
  env.optimum_grid = uniform_grid(spec.optimum_grid_size);
  env.context_sampler = [d = spec.d](Rng& rng) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform01();
    return x;
  };

  auto components = std::make_shared<std::vector<PiecewisePoly>>();
  for (int s = 0; s < spec.S; ++s) {
    components->push_back(sample_concave_function(
        spec.fine_grid_size, spec.action_lengthscale,
        derive_seed(spec.seed, 0xC0'00 + static_cast<std::uint64_t>(s))));
  }

  auto etas = std::make_shared<std::vector<std::unique_ptr<LazyGpSampler>>>();
  for (int s = 0; s < spec.S; ++s) {
    etas->push_back(std::make_unique<LazyGpSampler>(
        spec.theta, 1.0,
        derive_seed(spec.seed, 0xE7'00 + static_cast<std::uint64_t>(s))));
  }
  auto gamma = std::make_shared<LazyGpSampler>(
      spec.theta, 1.0, derive_seed(spec.seed, 0x6A'77A));

  const int S = spec.S;
  env.reward_fn = [components, etas, gamma, S](double a,
                                               const Eigen::VectorXd& x) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw DomainError("synthetic reward: action outside [0, 1]");
    }
    double out = gamma->value(x);
    for (int s = 0; s < S; ++s) {
      const double eta = (*etas)[static_cast<std::size_t>(s)]->value(x);
      out += (*components)[static_cast<std::size_t>(s)].eval(a) * eta * eta;
    }
    return out;
  };

  // Component values over the optimum grid, precomputed for the regret sup.
  auto h_grid = std::make_shared<Eigen::MatrixXd>(env.optimum_grid.size(),
                                                  std::max(S, 1));
  h_grid->setZero();
  for (int s = 0; s < S; ++s) {
    for (Eigen::Index i = 0; i < env.optimum_grid.size(); ++i) {
      (*h_grid)(i, s) =
          (*components)[static_cast<std::size_t>(s)].eval(env.optimum_grid[i]);
    }
  }
  env.max_reward_fn = [h_grid, etas, gamma, S](const Eigen::VectorXd& x) {
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(std::max(S, 1));
    for (int s = 0; s < S; ++s) {
      const double eta = (*etas)[static_cast<std::size_t>(s)]->value(x);
      weights[s] = eta * eta;
    }
    const double base = gamma->value(x);
    return S == 0 ? base : (*h_grid * weights).maxCoeff() + base;
  };
  return env;
}

double observe(const Environment& env, double a, const Eigen::VectorXd& x,
               Rng& rng) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("observe: action outside [0, 1]");
  }
  return env.reward_fn(a, x) + env.noise_sd * rng.normal();
}

double regret(const Environment& env, double a, const Eigen::VectorXd& x) {
  const double achieved = env.reward_fn(a, x);
  double best = achieved;  // the true sup dominates the achieved reward
  if (env.max_reward_fn) {
    best = std::max(best, env.max_reward_fn(x));
  } else {
    for (Eigen::Index i = 0; i < env.optimum_grid.size(); ++i) {
      best = std::max(best, env.reward_fn(env.optimum_grid[i], x));
    }
  }
  return best - achieved;
}

}  // namespace csgp
