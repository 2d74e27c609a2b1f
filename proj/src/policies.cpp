#include "csgp/policies.hpp"

#include <cmath>
#include <limits>

#include "csgp/errors.hpp"
#include "csgp/rng.hpp"

namespace csgp {

double alpha(const AlphaSchedule& schedule, int t) {
  if (!(schedule.delta > 0.0 && schedule.delta < 1.0)) {
    throw DomainError("alpha: delta must lie in (0, 1)");
  }
  if (t < 1) throw DomainError("alpha: t must be >= 1");
  const double td = static_cast<double>(t);
  if (schedule.variant == AlphaSchedule::Variant::kDiscrete) {
    return 2.0 * std::log(2.0 * schedule.action_count * td * td * M_PI *
                          M_PI / (6.0 * schedule.delta));
  }
  return 2.0 * std::log(4.0 * M_PI * M_PI * td * td / (3.0 * schedule.delta)) +
         2.0 * std::log(td * td * schedule.zeta *
                        std::sqrt(std::log(2.0 * schedule.eta /
                                           schedule.delta)));
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kCsgpUcb: return "csgp_ucb";
    case PolicyKind::kCsgpTs: return "csgp_ts";
    case PolicyKind::kGpUcb: return "gp_ucb";
    case PolicyKind::kGpTs: return "gp_ts";
    case PolicyKind::kSgpUcb: return "sgp_ucb";
    case PolicyKind::kSgpTs: return "sgp_ts";
  }
  throw ConfigError("unknown policy kind");
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "csgp_ucb") return PolicyKind::kCsgpUcb;
  if (name == "csgp_ts") return PolicyKind::kCsgpTs;
  if (name == "gp_ucb") return PolicyKind::kGpUcb;
  if (name == "gp_ts") return PolicyKind::kGpTs;
  if (name == "sgp_ucb") return PolicyKind::kSgpUcb;
  if (name == "sgp_ts") return PolicyKind::kSgpTs;
  throw ConfigError("unknown policy name: " + name);
}

bool policy_uses_truncation(PolicyKind kind) {
  return kind == PolicyKind::kCsgpUcb || kind == PolicyKind::kCsgpTs;
}

bool policy_uses_spline_model(PolicyKind kind) {
  return kind != PolicyKind::kGpUcb && kind != PolicyKind::kGpTs;
}

namespace {

void check_grid(const Eigen::VectorXd& grid) {
  if (grid.size() == 0) throw DomainError("empty action grid");
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw DomainError("action grid entry outside [0, 1]");
    }
  }
}

// First maximum wins: ties resolve to the lowest grid index.
int argmax_first(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

// Feature matrix of the grid against the *current-context block* of a
// (window * J)-dimensional coefficient posterior. Per the conditioning
// convention the current context occupies the last block.
Eigen::MatrixXd grid_features(const SplineBasisSpec& basis,
                              const Eigen::VectorXd& grid, int window) {
  const Eigen::Index n_a = grid.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(basis.J) * window;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_a, dim);
  for (Eigen::Index i = 0; i < n_a; ++i) {
    c.row(i).tail(basis.J) = phi(basis, grid[i]).transpose();
  }
  return c;
}

std::vector<Eigen::VectorXd> conditioning_contexts(
    const RewardPosterior& post, const Eigen::VectorXd& x_t, int window) {
  std::vector<Eigen::VectorXd> contexts;
  if (window > 1) {
    const auto& pts = post.points();
    const int extra = std::min<int>(window - 1, static_cast<int>(pts.size()));
    for (int i = extra; i >= 1; --i) {
      contexts.push_back(pts[pts.size() - static_cast<std::size_t>(i)].x);
    }
  }
  contexts.push_back(x_t);
  return contexts;
}

Eigen::VectorXd unconstrained_sigma(const CoefficientPosterior& cp,
                                    const Eigen::MatrixXd& feats) {
  Eigen::VectorXd sigma(feats.rows());
  for (Eigen::Index i = 0; i < feats.rows(); ++i) {
    const double v = feats.row(i) * cp.cov * feats.row(i).transpose();
    sigma[i] = std::sqrt(std::max(v, 0.0));
  }
  return sigma;
}

}  // namespace

Selection csgp_ucb_from_posterior(const RewardPosterior& post,
                                  const Eigen::VectorXd& x_t,
                                  const Eigen::VectorXd& grid, double alpha_t,
                                  const SamplerConfig& sampler,
                                  std::uint64_t seed, int window) {
  check_grid(grid);
  const auto contexts = conditioning_contexts(post, x_t, window);
  const CoefficientPosterior cp = post.beta_posterior(contexts);
  const Eigen::MatrixXd feats =
      grid_features(post.kernel().basis, grid, cp.num_contexts);

  // One truncated-posterior batch serves every grid action: under the
  // current-round conditioning the posterior is shared at fixed x_t.
  const TruncatedGaussian tg{cp.mean, cp.cov, cp.trunc};
  const SampleBatch batch =
      ess_sample(tg, sampler.draws, sampler.burn_in, seed);

  Selection sel;
  const Eigen::MatrixXd projected = batch.draws * feats.transpose();
  sel.diag.mu_star = projected.colwise().mean();
  sel.diag.se = batch_means_se(projected);
  sel.diag.sigma = unconstrained_sigma(cp, feats);
  sel.diag.alpha_used = alpha_t;
  sel.diag.score =
      sel.diag.mu_star + std::sqrt(alpha_t) * sel.diag.sigma;
  sel.index = argmax_first(sel.diag.score);
  sel.action = grid[sel.index];
  return sel;
}

Selection csgp_ts_from_posterior(const RewardPosterior& post,
                                 const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& grid,
                                 const SamplerConfig& sampler,
                                 std::uint64_t seed, int window) {
  check_grid(grid);
  const auto contexts = conditioning_contexts(post, x_t, window);
  const CoefficientPosterior cp = post.beta_posterior(contexts);
  const Eigen::MatrixXd feats =
      grid_features(post.kernel().basis, grid, cp.num_contexts);

  // A single joint draw scores every grid action simultaneously.
  const TruncatedGaussian tg{cp.mean, cp.cov, cp.trunc};
  const SampleBatch batch = ess_sample(tg, 1, sampler.burn_in, seed);
  const Eigen::VectorXd beta_star = batch.draws.row(0).transpose();

  Selection sel;
  sel.diag.mu_star = feats * beta_star;
  sel.diag.sigma = Eigen::VectorXd::Zero(grid.size());
  sel.diag.se = Eigen::VectorXd::Zero(grid.size());
  sel.diag.score = sel.diag.mu_star;
  sel.diag.sampled_beta = beta_star;
  sel.index = argmax_first(sel.diag.score);
  sel.action = grid[sel.index];
  return sel;
}

Selection sgp_ucb_from_posterior(const RewardPosterior& post,
                                 const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& grid, double alpha_t,
                                 std::uint64_t /*seed*/) {
  check_grid(grid);
  const CoefficientPosterior cp = post.beta_posterior({x_t});
  const Eigen::MatrixXd feats = grid_features(post.kernel().basis, grid, 1);

  Selection sel;
  sel.diag.mu_star = feats * cp.mean;  // exact mean, no truncation, no MC
  sel.diag.se = Eigen::VectorXd::Zero(grid.size());
  sel.diag.sigma = unconstrained_sigma(cp, feats);
  sel.diag.alpha_used = alpha_t;
  sel.diag.score = sel.diag.mu_star + std::sqrt(alpha_t) * sel.diag.sigma;
  sel.index = argmax_first(sel.diag.score);
  sel.action = grid[sel.index];
  return sel;
}

Selection sgp_ts_from_posterior(const RewardPosterior& post,
                                const Eigen::VectorXd& x_t,
                                const Eigen::VectorXd& grid,
                                std::uint64_t seed) {
  check_grid(grid);
  const CoefficientPosterior cp = post.beta_posterior({x_t});
  const Eigen::MatrixXd feats = grid_features(post.kernel().basis, grid, 1);

  const Eigen::MatrixXd l = psd_factor(cp.cov);
  Rng rng(seed);
  Eigen::VectorXd z(cp.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd beta_star = cp.mean + l * z;

  Selection sel;
  sel.diag.mu_star = feats * beta_star;
  sel.diag.sigma = Eigen::VectorXd::Zero(grid.size());
  sel.diag.se = Eigen::VectorXd::Zero(grid.size());
  sel.diag.score = sel.diag.mu_star;
  sel.diag.sampled_beta = beta_star;
  sel.index = argmax_first(sel.diag.score);
  sel.action = grid[sel.index];
  return sel;
}

Selection csgp_ucb_select(const CSGPKernel& kernel,
                          const BanditHistory& history,
                          const Eigen::VectorXd& x_t,
                          const Eigen::VectorXd& grid, int t,
                          const AlphaSchedule& schedule,
                          const SamplerConfig& sampler, std::uint64_t seed) {
  RewardPosterior post(kernel, history.noise_var);
  post.append_history(history);
  return csgp_ucb_from_posterior(post, x_t, grid, alpha(schedule, t), sampler,
                                 seed);
}

Selection csgp_thompson_select(const CSGPKernel& kernel,
                               const BanditHistory& history,
                               const Eigen::VectorXd& x_t,
                               const Eigen::VectorXd& grid,
                               const SamplerConfig& sampler,
                               std::uint64_t seed) {
  RewardPosterior post(kernel, history.noise_var);
  post.append_history(history);
  return csgp_ts_from_posterior(post, x_t, grid, sampler, seed);
}

Selection sgp_ucb_select(const CSGPKernel& kernel,
                         const BanditHistory& history,
                         const Eigen::VectorXd& x_t,
                         const Eigen::VectorXd& grid, int t,
                         const AlphaSchedule& schedule, std::uint64_t seed) {
  RewardPosterior post(kernel, history.noise_var);
  post.append_history(history);
  return sgp_ucb_from_posterior(post, x_t, grid, alpha(schedule, t), seed);
}

Selection sgp_thompson_select(const CSGPKernel& kernel,
                              const BanditHistory& history,
                              const Eigen::VectorXd& x_t,
                              const Eigen::VectorXd& grid,
                              std::uint64_t seed) {
  RewardPosterior post(kernel, history.noise_var);
  post.append_history(history);
  return sgp_ts_from_posterior(post, x_t, grid, seed);
}

JointGpPosterior::JointGpPosterior(BaseKernelSpec kernel, double noise_var)
    : kernel_(kernel), noise_var_(noise_var) {
  kernel_.validate();
}

void JointGpPosterior::append(double a, const Eigen::VectorXd& x, double y) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("JointGpPosterior::append: action outside [0, 1]");
  }
  Eigen::VectorXd point(x.size() + 1);
  point << a, x;
  Eigen::VectorXd cross(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    cross[i] = base_kernel_eval(kernel_, point, points_.row(i).transpose());
  }
  chol_.append(cross, kernel_.variance + noise_var_);
  points_.conservativeResize(n_ + 1, point.size());
  points_.row(n_) = point.transpose();
  y_.conservativeResize(n_ + 1);
  y_[n_] = y;
  ++n_;
}

void JointGpPosterior::reset_kernel(const BaseKernelSpec& kernel) {
  kernel_ = kernel;
  kernel_.validate();
  if (n_ == 0) return;
  Eigen::MatrixXd sys = base_gram(kernel_, points_);
  sys.diagonal().array() += noise_var_;
  chol_.reset(sys);
}

GpPosterior JointGpPosterior::predict(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& grid) const {
  check_grid(grid);
  const Eigen::Index n_a = grid.size();
  Eigen::MatrixXd query(n_a, x.size() + 1);
  for (Eigen::Index i = 0; i < n_a; ++i) {
    query(i, 0) = grid[i];
    query.row(i).tail(x.size()) = x.transpose();
  }
  const Eigen::MatrixXd k_mm = base_gram_serial(kernel_, query);
  if (n_ == 0) {
    return GpPosterior{Eigen::VectorXd::Zero(n_a), k_mm};
  }
  Eigen::MatrixXd k_mn(n_a, n_);
  for (Eigen::Index i = 0; i < n_a; ++i) {
    for (Eigen::Index c = 0; c < n_; ++c) {
      k_mn(i, c) = base_kernel_eval(kernel_, query.row(i).transpose(),
                                    points_.row(c).transpose());
    }
  }
  GpPosterior post;
  post.mean = k_mn * chol_.solve(y_);
  post.cov = k_mm - k_mn * chol_.solve_matrix(k_mn.transpose());
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

Selection gp_ucb_from_posterior(const JointGpPosterior& post,
                                const Eigen::VectorXd& x_t,
                                const Eigen::VectorXd& grid, double alpha_t) {
  const GpPosterior pred = post.predict(x_t, grid);
  Selection sel;
  sel.diag.mu_star = pred.mean;
  sel.diag.sigma = pred.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  sel.diag.se = Eigen::VectorXd::Zero(grid.size());
  sel.diag.alpha_used = alpha_t;
  sel.diag.score = sel.diag.mu_star + std::sqrt(alpha_t) * sel.diag.sigma;
  sel.index = argmax_first(sel.diag.score);
  sel.action = grid[sel.index];
  return sel;
}

Selection gp_ts_from_posterior(const JointGpPosterior& post,
                               const Eigen::VectorXd& x_t,
                               const Eigen::VectorXd& grid,
                               std::uint64_t seed) {
  const GpPosterior pred = post.predict(x_t, grid);
  const Eigen::MatrixXd l = psd_factor(pred.cov);
  Rng rng(seed);
  Eigen::VectorXd z(grid.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();

  Selection sel;
  sel.diag.mu_star = pred.mean + l * z;  // joint sample over the grid
  sel.diag.sigma = Eigen::VectorXd::Zero(grid.size());
  sel.diag.se = Eigen::VectorXd::Zero(grid.size());
  sel.diag.score = sel.diag.mu_star;
  sel.index = argmax_first(sel.diag.score);
  sel.action = grid[sel.index];
  return sel;
}

Selection gp_ucb_select(const BaseKernelSpec& kernel,
                        const BanditHistory& history,
                        const Eigen::VectorXd& x_t,
                        const Eigen::VectorXd& grid, int t,
                        const AlphaSchedule& schedule) {
  JointGpPosterior post(kernel, history.noise_var);
  for (const auto& r : history.rounds) {
    post.append(r.action, r.context, r.reward);
  }
  return gp_ucb_from_posterior(post, x_t, grid, alpha(schedule, t));
}

Selection gp_ts_select(const BaseKernelSpec& kernel,
                       const BanditHistory& history,
                       const Eigen::VectorXd& x_t,
                       const Eigen::VectorXd& grid, std::uint64_t seed) {
  JointGpPosterior post(kernel, history.noise_var);
  for (const auto& r : history.rounds) {
    post.append(r.action, r.context, r.reward);
  }
  return gp_ts_from_posterior(post, x_t, grid, seed);
}

}  // namespace csgp
