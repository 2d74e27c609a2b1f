#ifndef CSGP_KERNEL_HPP_
#define CSGP_KERNEL_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csgp/history.hpp"
#include "csgp/spline_basis.hpp"

namespace csgp {

enum class KernelFamily { kGaussian, kMatern };

std::string kernel_family_name(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

// Isotropic context kernel. Matern requires nu > 2 so that the induced
// reward kernel is smooth enough for the continuous-action confidence
// schedule to apply.
struct BaseKernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  double lengthscale = 1.0;
  double variance = 1.0;
  double matern_nu = 2.5;

  void validate() const;
};

double base_kernel_eval(const BaseKernelSpec& spec, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x2);

using MeanFn = std::function<double(const Eigen::VectorXd&)>;

// Composite reward covariance: independent GP priors on the J spline
// coefficients induce k_f((a,x),(a',x')) = sum_j phi_j(a) k_j(x,x') phi_j(a').
struct CSGPKernel {
  SplineBasisSpec basis;
  std::vector<BaseKernelSpec> components;  // one per coefficient process
  std::vector<MeanFn> mean_fns;            // empty => zero prior means
  bool tied = true;  // components share one (lengthscale, variance) pair

  Eigen::VectorXd mean_beta(const Eigen::VectorXd& x) const;
  double mean_f(double a, const Eigen::VectorXd& x) const;
};

CSGPKernel make_csgp_kernel(const SplineBasisSpec& basis,
                            const BaseKernelSpec& component, bool tied = true);

double kf(const CSGPKernel& kernel, double a, const Eigen::VectorXd& x,
          double a2, const Eigen::VectorXd& x2);

// cov(f(a, x), beta_j(x2)) = phi_j(a) k_j(x, x2); j is zero-based.
double kf_beta(const CSGPKernel& kernel, double a, const Eigen::VectorXd& x,
               int j, const Eigen::VectorXd& x2);

// Gram matrix of kf over the given points. `gram` parallelizes entry
// assembly with OpenMP; `gram_serial` is the reference implementation the
// tests compare against (entries are independent, so both agree exactly).
Eigen::MatrixXd gram_serial(const CSGPKernel& kernel,
                            const std::vector<ActionContext>& points);
Eigen::MatrixXd gram(const CSGPKernel& kernel,
                     const std::vector<ActionContext>& points);

// Gram matrix of a base kernel over rows of `points` (used by the
// unconstrained GP baseline that models (a, x) jointly).
Eigen::MatrixXd base_gram_serial(const BaseKernelSpec& spec,
                                 const Eigen::MatrixXd& points);
Eigen::MatrixXd base_gram(const BaseKernelSpec& spec,
                          const Eigen::MatrixXd& points);

// Standard GP evidence -1/2 y^T (K+s2 I)^-1 y - 1/2 log|K+s2 I| - n/2 log 2pi
// with K the CSGP Gram matrix over the history points.
double log_marginal_likelihood(const CSGPKernel& kernel, double noise_var,
                               const BanditHistory& history);

// Maximizes the evidence over (log lengthscale, log variance) with a seeded
// multi-start pattern search of at most `budget` evaluations. Tied kernels
// share one pair; untied kernels perturb every component. Never returns a
// kernel with lower evidence than the input.
CSGPKernel fit_hyperparams(const CSGPKernel& kernel, double noise_var,
                           const BanditHistory& history, int budget,
                           std::uint64_t seed = 0);

// Same guarded search for the joint-input baseline kernel.
BaseKernelSpec fit_base_hyperparams(const BaseKernelSpec& spec,
                                    double noise_var,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& y, int budget,
                                    std::uint64_t seed = 0);

double base_log_marginal_likelihood(const BaseKernelSpec& spec,
                                    double noise_var,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& y);

}  // namespace csgp

#endif  // CSGP_KERNEL_HPP_
