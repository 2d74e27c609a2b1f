#ifndef CSGP_POLICIES_HPP_
#define CSGP_POLICIES_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "csgp/posterior.hpp"
#include "csgp/truncated_mvn.hpp"

namespace csgp {

// Confidence schedule of the UCB rule. The discrete variant covers a finite
// action grid; the continuous variant additionally depends on the
// sample-path constants (eta, zeta).
struct AlphaSchedule {
  enum class Variant { kDiscrete, kContinuous };
  Variant variant = Variant::kDiscrete;
  double delta = 0.1;
  int action_count = 100;
  double eta = 1.0;
  double zeta = 1.0;
};

double alpha(const AlphaSchedule& schedule, int t);

struct SamplerConfig {
  int draws = 2000;
  int burn_in = 200;
};

enum class PolicyKind { kCsgpUcb, kCsgpTs, kGpUcb, kGpTs, kSgpUcb, kSgpTs };

std::string policy_name(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);
bool policy_uses_truncation(PolicyKind kind);
bool policy_uses_spline_model(PolicyKind kind);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kCsgpUcb;
  AlphaSchedule schedule;                // UCB only
  SamplerConfig sampler;                 // truncated posterior sampling
  std::optional<double> alpha_override;  // fixed alpha (greedy ablations)
};

// Per-action scores recorded for tracing; `sampled_beta` is populated by the
// Thompson variants with the joint coefficient draw behind the decision.
struct SelectionDiagnostics {
  Eigen::VectorXd mu_star;
  Eigen::VectorXd sigma;
  Eigen::VectorXd se;
  Eigen::VectorXd score;
  double alpha_used = 0.0;
  Eigen::VectorXd sampled_beta;
};

struct Selection {
  double action = 0.0;
  int index = 0;
  SelectionDiagnostics diag;
};

// --- Spline-model policies (stateful fast path) ---
// CSGP variants condition on the concavity event of the current round;
// SGP variants run the identical machinery with truncation disabled. The
// UCB bonus always uses the *unconstrained* posterior standard deviation.
Selection csgp_ucb_from_posterior(const RewardPosterior& post,
                                  const Eigen::VectorXd& x_t,
                                  const Eigen::VectorXd& grid, double alpha_t,
                                  const SamplerConfig& sampler,
                                  std::uint64_t seed, int window = 1);
Selection csgp_ts_from_posterior(const RewardPosterior& post,
                                 const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& grid,
                                 const SamplerConfig& sampler,
                                 std::uint64_t seed, int window = 1);
Selection sgp_ucb_from_posterior(const RewardPosterior& post,
                                 const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& grid, double alpha_t,
                                 std::uint64_t seed);
Selection sgp_ts_from_posterior(const RewardPosterior& post,
                                const Eigen::VectorXd& x_t,
                                const Eigen::VectorXd& grid,
                                std::uint64_t seed);

// --- Spec-level stateless wrappers (rebuild the posterior per call) ---
Selection csgp_ucb_select(const CSGPKernel& kernel,
                          const BanditHistory& history,
                          const Eigen::VectorXd& x_t,
                          const Eigen::VectorXd& grid, int t,
                          const AlphaSchedule& schedule,
                          const SamplerConfig& sampler, std::uint64_t seed);
Selection csgp_thompson_select(const CSGPKernel& kernel,
                               const BanditHistory& history,
                               const Eigen::VectorXd& x_t,
                               const Eigen::VectorXd& grid,
                               const SamplerConfig& sampler,
                               std::uint64_t seed);
Selection sgp_ucb_select(const CSGPKernel& kernel,
                         const BanditHistory& history,
                         const Eigen::VectorXd& x_t,
                         const Eigen::VectorXd& grid, int t,
                         const AlphaSchedule& schedule, std::uint64_t seed);
Selection sgp_thompson_select(const CSGPKernel& kernel,
                              const BanditHistory& history,
                              const Eigen::VectorXd& x_t,
                              const Eigen::VectorXd& grid, std::uint64_t seed);

// --- Unconstrained GP baseline over the joint input (a, x) ---
class JointGpPosterior {
 public:
  JointGpPosterior(BaseKernelSpec kernel, double noise_var);

  void append(double a, const Eigen::VectorXd& x, double y);
  void reset_kernel(const BaseKernelSpec& kernel);

  // Posterior mean and covariance of f over grid actions at context x.
  GpPosterior predict(const Eigen::VectorXd& x,
                      const Eigen::VectorXd& grid) const;

  const BaseKernelSpec& kernel() const { return kernel_; }
  double noise_var() const { return noise_var_; }
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& rewards() const { return y_; }
  Eigen::Index size() const { return n_; }

 private:
  BaseKernelSpec kernel_;
  double noise_var_;
  Eigen::MatrixXd points_;  // n x (d+1), row = (a, x)
  Eigen::VectorXd y_;
  Eigen::Index n_ = 0;
  IncrementalCholesky chol_;
};

Selection gp_ucb_from_posterior(const JointGpPosterior& post,
                                const Eigen::VectorXd& x_t,
                                const Eigen::VectorXd& grid, double alpha_t);
Selection gp_ts_from_posterior(const JointGpPosterior& post,
                               const Eigen::VectorXd& x_t,
                               const Eigen::VectorXd& grid,
                               std::uint64_t seed);

Selection gp_ucb_select(const BaseKernelSpec& kernel,
                        const BanditHistory& history,
                        const Eigen::VectorXd& x_t,
                        const Eigen::VectorXd& grid, int t,
                        const AlphaSchedule& schedule);
Selection gp_ts_select(const BaseKernelSpec& kernel,
                       const BanditHistory& history,
                       const Eigen::VectorXd& x_t,
                       const Eigen::VectorXd& grid, std::uint64_t seed);

}  // namespace csgp

#endif  // CSGP_POLICIES_HPP_
