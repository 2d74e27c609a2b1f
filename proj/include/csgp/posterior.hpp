#ifndef CSGP_POSTERIOR_HPP_
#define CSGP_POSTERIOR_HPP_

#include <vector>

#include <Eigen/Dense>

#include "csgp/history.hpp"
#include "csgp/kernel.hpp"
#include "csgp/linalg.hpp"

namespace csgp {

struct GpPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Exact Gaussian conditioning:
//   mean = prior_mean_query + K_mn (K_nn + s2 I)^-1 (y - prior_mean_obs)
//   cov  = K_mm - K_mn (K_nn + s2 I)^-1 K_mn^T
// Zero observations returns the prior.
GpPosterior gp_posterior(const Eigen::VectorXd& prior_mean_query,
                         const Eigen::MatrixXd& k_nn,
                         const Eigen::MatrixXd& k_mn,
                         const Eigen::MatrixXd& k_mm, double noise_var,
                         const Eigen::VectorXd& y,
                         const Eigen::VectorXd& prior_mean_obs);

// Joint Gaussian over the stacked coefficient vector beta at m contexts,
// ordered (context block) x (coefficient j). `trunc` carries the upper
// truncation: 0 on C-spline coordinates, +inf on linear/constant ones.
// Truncation is NOT applied to mean/cov here; downstream samplers consume it.
struct CoefficientPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd trunc;
  int J = 0;
  int num_contexts = 0;
};

CoefficientPosterior beta_posterior(
    const CSGPKernel& kernel, const BanditHistory& history,
    const std::vector<Eigen::VectorXd>& contexts);

// The truncation pattern depends only on (m, J), never on data.
Eigen::VectorXd truncation_pattern(int J, int num_contexts);

// Posterior variance of f(a, x) under the *unconstrained* model, kernel form:
//   kf((a,x),(a,x)) - k_vec^T (K + s2 I)^-1 k_vec.
// Identical (to numerical precision) to phi(a)^T Sigma_beta phi(a) computed
// through beta_posterior; the tests assert that identity.
double unconstrained_reward_variance(const CSGPKernel& kernel,
                                     const BanditHistory& history, double a,
                                     const Eigen::VectorXd& x);

// Per-episode posterior state for the spline model. Keeps the Cholesky
// factor of (K + s2 I) updated incrementally as observations append; a
// hyperparameter refit triggers a full refactorization.
class RewardPosterior {
 public:
  RewardPosterior(CSGPKernel kernel, double noise_var);

  void append(double a, const Eigen::VectorXd& x, double y);
  void append_history(const BanditHistory& history);

  // Swap in a refitted kernel and refactor.
  void reset_kernel(const CSGPKernel& kernel);

  CoefficientPosterior beta_posterior(
      const std::vector<Eigen::VectorXd>& contexts) const;

  double reward_variance(double a, const Eigen::VectorXd& x) const;

  const CSGPKernel& kernel() const { return kernel_; }
  double noise_var() const { return noise_var_; }
  const std::vector<ActionContext>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  BanditHistory history() const;

 private:
  void refactor();

  CSGPKernel kernel_;
  double noise_var_;
  std::vector<ActionContext> points_;
  std::vector<double> y_;
  IncrementalCholesky chol_;  // factor of K + s2 I
};

}  // namespace csgp

#endif  // CSGP_POSTERIOR_HPP_
