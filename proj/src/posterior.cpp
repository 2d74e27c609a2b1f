#include "csgp/posterior.hpp"

#include <cmath>
#include <limits>

#include "csgp/errors.hpp"

namespace csgp {

GpPosterior gp_posterior(const Eigen::VectorXd& prior_mean_query,
                         const Eigen::MatrixXd& k_nn,
                         const Eigen::MatrixXd& k_mn,
                         const Eigen::MatrixXd& k_mm, double noise_var,
                         const Eigen::VectorXd& y,
                         const Eigen::VectorXd& prior_mean_obs) {
  const Eigen::Index n = k_nn.rows();
  const Eigen::Index m = k_mm.rows();
  if (k_mn.rows() != m || k_mn.cols() != n || y.size() != n ||
      prior_mean_query.size() != m || prior_mean_obs.size() != n) {
    throw DimensionError("gp_posterior: nonconformable shapes");
  }
  if (n == 0) {
    return GpPosterior{prior_mean_query, k_mm};
  }
  Eigen::MatrixXd sys = k_nn;
  sys.diagonal().array() += noise_var;
  const Eigen::MatrixXd l = jittered_cholesky(sys);
  const Eigen::VectorXd alpha = cholesky_solve(l, y - prior_mean_obs);
  GpPosterior post;
  post.mean = prior_mean_query + k_mn * alpha;
  const Eigen::MatrixXd w = cholesky_solve(l, k_mn.transpose());
  post.cov = k_mm - k_mn * w;
  // Symmetrize against round-off.
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

Eigen::VectorXd truncation_pattern(int J, int num_contexts) {
  Eigen::VectorXd trunc(static_cast<Eigen::Index>(J) * num_contexts);
  const double inf = std::numeric_limits<double>::infinity();
  for (int b = 0; b < num_contexts; ++b) {
    for (int j = 0; j < J; ++j) {
      trunc[static_cast<Eigen::Index>(b) * J + j] = (j < J - 2) ? 0.0 : inf;
    }
  }
  return trunc;
}

CoefficientPosterior beta_posterior(
    const CSGPKernel& kernel, const BanditHistory& history,
    const std::vector<Eigen::VectorXd>& contexts) {
  RewardPosterior state(kernel, history.noise_var);
  state.append_history(history);
  return state.beta_posterior(contexts);
}

double unconstrained_reward_variance(const CSGPKernel& kernel,
                                     const BanditHistory& history, double a,
                                     const Eigen::VectorXd& x) {
  RewardPosterior state(kernel, history.noise_var);
  state.append_history(history);
  return state.reward_variance(a, x);
}

RewardPosterior::RewardPosterior(CSGPKernel kernel, double noise_var)
    : kernel_(std::move(kernel)), noise_var_(noise_var) {}

void RewardPosterior::append(double a, const Eigen::VectorXd& x, double y) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("RewardPosterior::append: action outside [0, 1]");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(points_.size());
  Eigen::VectorXd cross(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points_[static_cast<std::size_t>(i)];
    cross[i] = kf(kernel_, a, x, p.a, p.x);
  }
  chol_.append(cross, kf(kernel_, a, x, a, x) + noise_var_);
  points_.push_back({a, x});
  y_.push_back(y);
}

void RewardPosterior::append_history(const BanditHistory& history) {
  for (const auto& r : history.rounds) {
    append(r.action, r.context, r.reward);
  }
}

void RewardPosterior::reset_kernel(const CSGPKernel& kernel) {
  kernel_ = kernel;
  refactor();
}

void RewardPosterior::refactor() {
  if (points_.empty()) {
    chol_ = IncrementalCholesky();
    return;
  }
  Eigen::MatrixXd sys = gram(kernel_, points_);
  sys.diagonal().array() += noise_var_;
  chol_.reset(sys);
}

BanditHistory RewardPosterior::history() const {
  BanditHistory h;
  h.noise_var = noise_var_;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    h.append(points_[i].x, points_[i].a, y_[i]);
  }
  return h;
}

CoefficientPosterior RewardPosterior::beta_posterior(
    const std::vector<Eigen::VectorXd>& contexts) const {
  if (contexts.empty()) {
    throw DomainError("beta_posterior: need at least one context");
  }
  const int J = kernel_.basis.J;
  const int m = static_cast<int>(contexts.size());
  const Eigen::Index n = static_cast<Eigen::Index>(points_.size());
  const Eigen::Index dim = static_cast<Eigen::Index>(J) * m;

  Eigen::VectorXd prior_mean(dim);
  for (int b = 0; b < m; ++b) {
    prior_mean.segment(static_cast<Eigen::Index>(b) * J, J) =
        kernel_.mean_beta(contexts[static_cast<std::size_t>(b)]);
  }

  // Prior covariance of the stacked coefficients: coefficient processes are
  // independent across j, correlated across contexts through k_j.
  Eigen::MatrixXd k_mm(dim, dim);
  k_mm.setZero();
  for (int b = 0; b < m; ++b) {
    for (int b2 = 0; b2 < m; ++b2) {
      for (int j = 0; j < J; ++j) {
        k_mm(static_cast<Eigen::Index>(b) * J + j,
             static_cast<Eigen::Index>(b2) * J + j) =
            base_kernel_eval(kernel_.components[static_cast<std::size_t>(j)],
                             contexts[static_cast<std::size_t>(b)],
                             contexts[static_cast<std::size_t>(b2)]);
      }
    }
  }

  CoefficientPosterior post;
  post.J = J;
  post.num_contexts = m;
  post.trunc = truncation_pattern(J, m);

  if (n == 0) {
    post.mean = prior_mean;
    post.cov = k_mm;
    return post;
  }

  // Cross-covariance cov(beta_j(x_b), f(a_i, x_i)) = phi_j(a_i) k_j(x_i, x_b).
  Eigen::MatrixXd k_mn(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points_[static_cast<std::size_t>(i)];
    const Eigen::VectorXd p_phi = phi(kernel_.basis, p.a);
    for (int b = 0; b < m; ++b) {
      for (int j = 0; j < J; ++j) {
        k_mn(static_cast<Eigen::Index>(b) * J + j, i) =
            p_phi[j] *
            base_kernel_eval(kernel_.components[static_cast<std::size_t>(j)],
                             p.x, contexts[static_cast<std::size_t>(b)]);
      }
    }
  }

  Eigen::VectorXd centered(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points_[static_cast<std::size_t>(i)];
    centered[i] = y_[static_cast<std::size_t>(i)] - kernel_.mean_f(p.a, p.x);
  }

  post.mean = prior_mean + k_mn * chol_.solve(centered);
  const Eigen::MatrixXd w = chol_.solve_matrix(k_mn.transpose());
  post.cov = k_mm - k_mn * w;
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

double RewardPosterior::reward_variance(double a,
                                        const Eigen::VectorXd& x) const {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("reward_variance: action outside [0, 1]");
  }
  const double prior = kf(kernel_, a, x, a, x);
  const Eigen::Index n = static_cast<Eigen::Index>(points_.size());
  if (n == 0) return prior;
  Eigen::VectorXd k_vec(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points_[static_cast<std::size_t>(i)];
    k_vec[i] = kf(kernel_, a, x, p.a, p.x);
  }
  const Eigen::VectorXd half = chol_.forward_solve(k_vec);
  return std::max(prior - half.squaredNorm(), 0.0);
}

}  // namespace csgp
