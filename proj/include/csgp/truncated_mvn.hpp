#ifndef CSGP_TRUNCATED_MVN_HPP_
#define CSGP_TRUNCATED_MVN_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace csgp {

// Multivariate normal truncated coordinatewise from above: w <= upper.
// Entries of `upper` may be +inf (unconstrained coordinates).
struct TruncatedGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd upper;
};

struct SampleBatch {
  Eigen::MatrixXd draws;  // n_samples x dim, every row feasible
  std::uint64_t seed = 0;
  int burn_in = 0;
  long ess_moves = 0;  // total slice shrinkage steps (diagnostic)
};

// Elliptical slice sampler specialized to the indicator likelihood
// 1{w <= upper}: a proposed angle is accepted iff the rotated point is
// feasible, otherwise the bracket shrinks geometrically (at most
// `kMaxShrink` times before signalling a degenerate covariance).
// Deterministic given `seed`. The chain starts from the mean clamped
// strictly below the bound coordinatewise.
inline constexpr int kMaxShrink = 64;

SampleBatch ess_sample(const TruncatedGaussian& tg, int n, int burn_in,
                       std::uint64_t seed);

struct TruncMean {
  Eigen::VectorXd mean;
  Eigen::VectorXd se;  // batch-means standard errors
};

// Monte-Carlo mean of the truncated Gaussian with batch-means error bars.
TruncMean trunc_mean(const TruncatedGaussian& tg, int n, std::uint64_t seed,
                     int burn_in = 200);

// Batch-means standard error of each column of `draws`.
Eigen::VectorXd batch_means_se(const Eigen::MatrixXd& draws);

// Closed form mu - sigma * pdf(alpha)/cdf(alpha), alpha = (nu - mu)/sigma.
// Far tails switch to the asymptotic Mills-ratio expansion.
double univariate_trunc_mean(double mu, double var, double nu);

// Empirical check of the sub-Gaussian tail bound: compares the two-sided
// tail frequency of c^T w (centered at its Monte-Carlo mean) against
// 2 exp(-v^2 / (2 sigma_c^2)) at each level v, with a 99% binomial margin.
struct TailCheckReport {
  double sigma_c = 0.0;
  int n = 0;
  std::vector<double> levels;
  std::vector<double> frequencies;
  std::vector<double> bounds;
  std::vector<double> margins;
  std::vector<bool> pass;
  bool all_pass = true;
};

TailCheckReport subgaussian_tail_check(const TruncatedGaussian& tg,
                                       const Eigen::VectorXd& direction,
                                       const std::vector<double>& levels,
                                       int n, std::uint64_t seed);

}  // namespace csgp

#endif  // CSGP_TRUNCATED_MVN_HPP_
