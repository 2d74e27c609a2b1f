#include "csgp/validation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "csgp/environments.hpp"
#include "csgp/policies.hpp"
#include "csgp/rng.hpp"
#include "csgp/truncated_mvn.hpp"

namespace csgp {

namespace {

std::string num(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

CheckResult check(const std::string& suite, const std::string& name,
                  bool pass, const std::string& detail) {
  return CheckResult{suite, name, pass, detail};
}

// Brute-force Gaussian conditioning: dense inverse over the full joint
// covariance, deliberately avoiding the Cholesky path used in production.
GpPosterior conditioning_oracle(const Eigen::VectorXd& joint_mean,
                                const Eigen::MatrixXd& joint_cov,
                                Eigen::Index n_obs, double noise_var,
                                const Eigen::VectorXd& y) {
  const Eigen::Index m = joint_mean.size() - n_obs;
  Eigen::MatrixXd c_oo = joint_cov.topLeftCorner(n_obs, n_obs);
  c_oo.diagonal().array() += noise_var;
  const Eigen::MatrixXd c_qo = joint_cov.bottomLeftCorner(m, n_obs);
  const Eigen::MatrixXd c_qq = joint_cov.bottomRightCorner(m, m);
  const Eigen::MatrixXd inv = c_oo.inverse();
  GpPosterior out;
  out.mean = joint_mean.tail(m) + c_qo * inv * (y - joint_mean.head(n_obs));
  out.cov = c_qq - c_qo * inv * c_qo.transpose();
  return out;
}

struct RandomInstance {
  CSGPKernel kernel;
  BanditHistory history;
  Eigen::VectorXd query_context;
};

RandomInstance random_instance(Rng& rng, int max_obs) {
  RandomInstance inst;
  const int knots = 1 + rng.uniform_int(2);
  const int order = 1 + rng.uniform_int(2);
  BaseKernelSpec base;
  base.lengthscale = rng.uniform(0.5, 2.0);
  base.variance = rng.uniform(0.5, 2.0);
  inst.kernel = make_csgp_kernel(build_basis(knots, order), base);

  const int d = 1 + rng.uniform_int(2);
  inst.history.noise_var = rng.uniform(0.05, 0.5);
  const int n = 1 + rng.uniform_int(max_obs);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int c = 0; c < d; ++c) x[c] = rng.uniform(-1.0, 1.0);
    inst.history.append(x, rng.uniform01(), rng.normal());
  }
  inst.query_context.resize(d);
  for (int c = 0; c < d; ++c) inst.query_context[c] = rng.uniform(-1.0, 1.0);
  return inst;
}

}  // namespace

int concavity_equivalence_violations(const SplineBasisSpec& spec,
                                     int n_vectors, int grid_points,
                                     double tol, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::VectorXd grid = uniform_grid(grid_points);
  Eigen::MatrixXd m_grid(grid_points, spec.num_mspline);
  for (int i = 0; i < grid_points; ++i) {
    m_grid.row(i) = mspline_eval(spec, grid[i]).transpose();
  }
  int violations = 0;
  for (int v = 0; v < n_vectors; ++v) {
    Eigen::VectorXd coef(spec.J);
    for (int j = 0; j < spec.J; ++j) {
      // Magnitude floor keeps positive coefficients visible on the grid.
      const double mag = rng.uniform(0.05, 1.0);
      coef[j] = rng.uniform01() < 0.5 ? -mag : mag;
    }
    const bool coeffs_nonpos =
        (coef.head(spec.num_mspline).array() <= 0.0).all();
    const Eigen::VectorXd curv = m_grid * coef.head(spec.num_mspline);
    const bool grid_concave = (curv.array() <= tol).all();
    if (coeffs_nonpos != grid_concave) ++violations;
  }
  return violations;
}

double posterior_oracle_max_error(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double max_err = 0.0;
  for (int it = 0; it < instances; ++it) {
    const RandomInstance inst = random_instance(rng, 6);
    const int J = inst.kernel.basis.J;
    const Eigen::Index n =
        static_cast<Eigen::Index>(inst.history.size());
    const Eigen::Index dim = n + J;

    // Joint covariance of (f at observed points, beta at query context),
    // assembled elementwise from kf and kf_beta.
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(dim, dim);
    const auto pts = inst.history.points();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < n; ++c) {
        joint(i, c) = kf(inst.kernel, pts[static_cast<std::size_t>(i)].a,
                         pts[static_cast<std::size_t>(i)].x,
                         pts[static_cast<std::size_t>(c)].a,
                         pts[static_cast<std::size_t>(c)].x);
      }
      for (int j = 0; j < J; ++j) {
        const double v =
            kf_beta(inst.kernel, pts[static_cast<std::size_t>(i)].a,
                    pts[static_cast<std::size_t>(i)].x, j,
                    inst.query_context);
        joint(i, n + j) = v;
        joint(n + j, i) = v;
      }
    }
    for (int j = 0; j < J; ++j) {
      joint(n + j, n + j) = base_kernel_eval(
          inst.kernel.components[static_cast<std::size_t>(j)],
          inst.query_context, inst.query_context);
    }

    const GpPosterior oracle =
        conditioning_oracle(Eigen::VectorXd::Zero(dim), joint, n,
                            inst.history.noise_var, inst.history.rewards());

    // Route 1: beta_posterior.
    const CoefficientPosterior cp =
        beta_posterior(inst.kernel, inst.history, {inst.query_context});
    max_err = std::max(max_err, (cp.mean - oracle.mean).cwiseAbs().maxCoeff());
    max_err = std::max(max_err, (cp.cov - oracle.cov).cwiseAbs().maxCoeff());

    // Route 2: the generic gp_posterior on the same blocks.
    const GpPosterior gp = gp_posterior(
        Eigen::VectorXd::Zero(J), joint.topLeftCorner(n, n),
        joint.bottomLeftCorner(J, n), joint.bottomRightCorner(J, J),
        inst.history.noise_var, inst.history.rewards(),
        Eigen::VectorXd::Zero(n));
    max_err = std::max(max_err, (gp.mean - oracle.mean).cwiseAbs().maxCoeff());
    max_err = std::max(max_err, (gp.cov - oracle.cov).cwiseAbs().maxCoeff());
  }
  return max_err;
}

double variance_dual_form_max_error(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double max_err = 0.0;
  for (int it = 0; it < instances; ++it) {
    const RandomInstance inst = random_instance(rng, 6);
    const double a = rng.uniform01();
    const double kernel_form = unconstrained_reward_variance(
        inst.kernel, inst.history, a, inst.query_context);
    const CoefficientPosterior cp =
        beta_posterior(inst.kernel, inst.history, {inst.query_context});
    const Eigen::VectorXd feat = phi(inst.kernel.basis, a);
    const double coeff_form = feat.dot(cp.cov * feat);
    max_err = std::max(max_err, std::abs(kernel_form - coeff_form));
  }
  return max_err;
}

std::vector<CoefficientPosterior> harvest_round_posteriors(
    int rounds, std::uint64_t seed) {
  const Environment env = make_warfarin_env(0.1);
  const Eigen::VectorXd grid = uniform_grid(100);
  BaseKernelSpec base;
  base.lengthscale = 2.0;
  base.variance = 25.0;
  RewardPosterior post(make_csgp_kernel(build_basis(5, 2), base), 0.1);

  Rng ctx_rng(derive_seed(seed, 1));
  Rng noise_rng(derive_seed(seed, 2));
  Rng action_rng(derive_seed(seed, 3));
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = env.context_sampler(ctx_rng);
    const double a = grid[action_rng.uniform_int(100)];
    post.append(a, x, observe(env, a, x, noise_rng));
  }

  AlphaSchedule schedule;
  schedule.action_count = 100;
  SamplerConfig sampler;
  std::vector<CoefficientPosterior> out;
  for (int t = 1; t <= rounds; ++t) {
    const Eigen::VectorXd x_t = env.context_sampler(ctx_rng);
    out.push_back(post.beta_posterior({x_t}));
    const Selection sel =
        csgp_ucb_from_posterior(post, x_t, grid, alpha(schedule, t), sampler,
                                derive_seed(seed, 100 + t));
    post.append(sel.action, x_t, observe(env, sel.action, x_t, noise_rng));
  }
  return out;
}

std::vector<CheckResult> validate_splines() {
  std::vector<CheckResult> out;
  const SplineBasisSpec spec = build_basis(5, 2);

  const int violations =
      concavity_equivalence_violations(spec, 1000, 1000, 1e-9, 0xC0DE);
  out.push_back(check("splines", "concavity-equivalence (1000 vectors)",
                      violations == 0, num(violations) + " counterexamples"));

  // Unit integrals by fine-grid quadrature.
  double worst = 0.0;
  const int quad_n = 10000;
  for (int j = 0; j < spec.num_mspline; ++j) {
    double integral = 0.0;
    for (int i = 0; i < quad_n; ++i) {
      const double a = (i + 0.5) / quad_n;
      integral += mspline_eval(spec, a)[j] / quad_n;
    }
    worst = std::max(worst, std::abs(integral - 1.0));
  }
  out.push_back(check("splines", "mspline unit integrals", worst < 1e-4,
                      "max deviation " + num(worst)));

  // Nonnegativity and C-spline monotonicity across a scan.
  bool nonneg = true;
  bool monotone = true;
  Eigen::VectorXd prev = cspline_eval(spec, 0.0);
  for (int i = 1; i <= 500; ++i) {
    const double a = static_cast<double>(i) / 500;
    const Eigen::VectorXd m = mspline_eval(spec, a);
    const Eigen::VectorXd c = cspline_eval(spec, a);
    nonneg = nonneg && (m.array() >= 0.0).all() && (c.array() >= 0.0).all();
    monotone = monotone && ((c - prev).array() >= -1e-12).all();
    prev = c;
  }
  out.push_back(check("splines", "m/c-spline nonnegativity", nonneg, ""));
  out.push_back(check("splines", "c-spline monotonicity", monotone, ""));

  // Continuity of phi at step 1e-6.
  double max_jump = 0.0;
  for (int i = 1; i < 50; ++i) {
    const double a = static_cast<double>(i) / 50;
    max_jump = std::max(
        max_jump, (phi(spec, a) - phi(spec, a - 1e-6)).cwiseAbs().maxCoeff());
  }
  out.push_back(check("splines", "phi continuity", max_jump < 1e-4,
                      "max step-1e-6 jump " + num(max_jump)));
  return out;
}

std::vector<CheckResult> validate_posterior() {
  std::vector<CheckResult> out;
  const double post_err = posterior_oracle_max_error(100, 0xBEEF);
  out.push_back(check("posterior", "joint-conditioning oracle (100 instances)",
                      post_err < 1e-8, "max error " + num(post_err)));
  const double var_err = variance_dual_form_max_error(100, 0xFACE);
  out.push_back(check("posterior", "variance dual-form identity",
                      var_err < 1e-8, "max error " + num(var_err)));

  // Posterior variance never exceeds prior variance.
  Rng rng(0x9A5E);
  bool shrinks = true;
  for (int it = 0; it < 25; ++it) {
    const RandomInstance inst = random_instance(rng, 6);
    const double a = rng.uniform01();
    const double prior =
        kf(inst.kernel, a, inst.query_context, a, inst.query_context);
    const double post = unconstrained_reward_variance(
        inst.kernel, inst.history, a, inst.query_context);
    shrinks = shrinks && post <= prior + 1e-10;
  }
  out.push_back(
      check("posterior", "posterior variance <= prior variance", shrinks, ""));

  // Truncation pattern depends only on (m, J).
  bool pattern_ok = true;
  for (const int m : {1, 2, 3}) {
    for (const int j_dim : {4, 9}) {
      const Eigen::VectorXd trunc = truncation_pattern(j_dim, m);
      int zeros = 0;
      int infs = 0;
      for (Eigen::Index i = 0; i < trunc.size(); ++i) {
        if (trunc[i] == 0.0) ++zeros;
        if (std::isinf(trunc[i])) ++infs;
      }
      pattern_ok = pattern_ok && zeros == m * (j_dim - 2) && infs == 2 * m;
    }
  }
  out.push_back(check("posterior", "truncation pattern", pattern_ok, ""));
  return out;
}

std::vector<CheckResult> validate_tmvn() {
  std::vector<CheckResult> out;

  const double closed = univariate_trunc_mean(0.0, 1.0, 0.0);
  out.push_back(check("tmvn", "univariate closed form",
                      std::abs(closed + 0.7978845608028654) < 1e-12,
                      "value " + num(closed)));

  // Unconstrained sampling recovers the mean.
  {
    TruncatedGaussian tg;
    tg.mean = Eigen::VectorXd::Constant(3, 1.5);
    tg.cov = Eigen::MatrixXd::Identity(3, 3);
    tg.upper =
        Eigen::VectorXd::Constant(3, std::numeric_limits<double>::infinity());
    const TruncMean tm = trunc_mean(tg, 10000, 0xA11);
    const double worst =
        ((tm.mean.array() - 1.5).abs() / (3.0 * tm.se.array())).maxCoeff();
    out.push_back(check("tmvn", "unconstrained mean within 3 SE", worst < 1.0,
                        "max |err|/3SE " + num(worst)));
  }

  // Diagonal covariance factorizes into univariate truncated means.
  {
    TruncatedGaussian tg;
    tg.mean = Eigen::Vector2d(0.5, -0.25);
    tg.cov = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    tg.upper = Eigen::Vector2d(0.0, 1.0);
    const TruncMean tm = trunc_mean(tg, 10000, 0xD1A6);
    bool pass = true;
    for (int i = 0; i < 2; ++i) {
      const double expect =
          univariate_trunc_mean(tg.mean[i], tg.cov(i, i), tg.upper[i]);
      pass = pass && std::abs(tm.mean[i] - expect) <= 3.0 * tm.se[i];
    }
    out.push_back(check("tmvn", "diagonal factorization within 3 SE", pass,
                        ""));
  }

  // Feasibility is exact, and two seeds agree.
  {
    TruncatedGaussian tg;
    tg.mean = Eigen::Vector3d(1.0, 0.5, 0.0);
    Eigen::MatrixXd cov(3, 3);
    cov << 1.0, 0.4, 0.2, 0.4, 1.0, 0.4, 0.2, 0.4, 1.0;
    tg.cov = cov;
    tg.upper = Eigen::Vector3d(0.0, 0.0,
                               std::numeric_limits<double>::infinity());
    const SampleBatch b1 = ess_sample(tg, 8000, 200, 7);
    const SampleBatch b2 = ess_sample(tg, 8000, 200, 77);
    bool feasible_all = true;
    for (Eigen::Index i = 0; i < b1.draws.rows(); ++i) {
      feasible_all = feasible_all && b1.draws(i, 0) <= 0.0 &&
                     b1.draws(i, 1) <= 0.0;
    }
    out.push_back(check("tmvn", "draw feasibility exact", feasible_all, ""));
    const Eigen::VectorXd m1 = b1.draws.colwise().mean();
    const Eigen::VectorXd m2 = b2.draws.colwise().mean();
    const Eigen::VectorXd se1 = batch_means_se(b1.draws);
    const Eigen::VectorXd se2 = batch_means_se(b2.draws);
    bool agree = true;
    for (int i = 0; i < 3; ++i) {
      const double tol =
          4.0 * std::sqrt(se1[i] * se1[i] + se2[i] * se2[i]);
      agree = agree && std::abs(m1[i] - m2[i]) <= tol;
    }
    out.push_back(check("tmvn", "two-seed agreement within 4 SE", agree, ""));
  }

  // Sub-Gaussian bound on a harvested bandit-round posterior.
  {
    const auto posteriors = harvest_round_posteriors(3, 0x5AB);
    const CoefficientPosterior& cp = posteriors.back();
    const TruncatedGaussian tg{cp.mean, cp.cov, cp.trunc};
    Rng dir_rng(0xD123);
    Eigen::VectorXd c(cp.mean.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = dir_rng.normal();
    const double sigma_c = std::sqrt(c.dot(tg.cov * c));
    const TailCheckReport report = subgaussian_tail_check(
        tg, c, {1.0 * sigma_c, 2.0 * sigma_c, 3.0 * sigma_c}, 20000, 0xF00D);
    out.push_back(check("tmvn", "sub-Gaussian tail bound (bandit round)",
                        report.all_pass, ""));
  }
  return out;
}

std::vector<CheckResult> validate_policies() {
  std::vector<CheckResult> out;
  const Environment env = make_warfarin_env(0.1);
  const Eigen::VectorXd grid = uniform_grid(50);
  BaseKernelSpec base;
  base.lengthscale = 2.0;
  base.variance = 25.0;
  const CSGPKernel kernel = make_csgp_kernel(build_basis(5, 2), base);

  BanditHistory history;
  history.noise_var = 0.1;
  Rng rng(0x7011C);
  Rng noise(0x99);
  for (int i = 0; i < 12; ++i) {
    Eigen::VectorXd x(7);
    for (int c = 0; c < 7; ++c) x[c] = rng.uniform(-1.0, 1.0);
    const double a = rng.uniform01();
    history.append(x, a, env.reward_fn(a, x) + 0.3 * noise.normal());
  }
  Eigen::VectorXd x_t(7);
  for (int c = 0; c < 7; ++c) x_t[c] = rng.uniform(-1.0, 1.0);

  AlphaSchedule schedule;
  schedule.action_count = static_cast<int>(grid.size());
  SamplerConfig sampler;

  // Determinism: equal seeds, equal actions.
  const Selection s1 = csgp_thompson_select(kernel, history, x_t, grid,
                                            sampler, 0x7E57);
  const Selection s2 = csgp_thompson_select(kernel, history, x_t, grid,
                                            sampler, 0x7E57);
  out.push_back(check("policies", "thompson determinism",
                      s1.index == s2.index, ""));

  // Thompson samples are concave curves.
  bool concave = true;
  for (int k = 0; k < 20; ++k) {
    const Selection sel = csgp_thompson_select(
        kernel, history, x_t, grid, sampler, derive_seed(0xC5, k));
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      concave = concave &&
                second_derivative(kernel.basis, sel.diag.sampled_beta,
                                  grid[i]) <= 1e-9;
    }
  }
  out.push_back(check("policies", "thompson sample concavity", concave, ""));

  // Shifting the constant-coefficient prior mean shifts every score equally.
  const Selection base_sel = csgp_ucb_select(kernel, history, x_t, grid, 3,
                                             schedule, sampler, 0xAB);
  CSGPKernel shifted = kernel;
  shifted.mean_fns.assign(static_cast<std::size_t>(kernel.basis.J), nullptr);
  shifted.mean_fns.back() = [](const Eigen::VectorXd&) { return 7.5; };
  BanditHistory shifted_history = history;
  for (auto& r : shifted_history.rounds) r.reward += 7.5;
  const Selection shift_sel = csgp_ucb_select(shifted, shifted_history, x_t,
                                              grid, 3, schedule, sampler,
                                              0xAB);
  out.push_back(check("policies", "argmax invariance under constant shift",
                      base_sel.index == shift_sel.index,
                      "base " + num(base_sel.index) + " shifted " +
                          num(shift_sel.index)));

  // UCB score decomposition is exactly mu* + sqrt(alpha) sigma.
  const Eigen::VectorXd recon =
      base_sel.diag.mu_star +
      std::sqrt(base_sel.diag.alpha_used) * base_sel.diag.sigma;
  out.push_back(check("policies", "ucb score decomposition",
                      (recon - base_sel.diag.score).cwiseAbs().maxCoeff() ==
                          0.0,
                      ""));
  return out;
}

std::vector<CheckResult> validate_all() {
  std::vector<CheckResult> out;
  for (auto&& v : {validate_splines(), validate_posterior(), validate_tmvn(),
                   validate_policies()}) {
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace csgp
