#include <doctest.h>

#include <cmath>

#include "csgp/errors.hpp"
#include "csgp/posterior.hpp"
#include "csgp/rng.hpp"
#include "csgp/validation.hpp"

using namespace csgp;

namespace {

Eigen::VectorXd random_context(Rng& rng, int d) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

CSGPKernel default_kernel(int knots = 3, int order = 2) {
  BaseKernelSpec base;
  return make_csgp_kernel(build_basis(knots, order), base);
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("zero observations return the prior") {
  const Eigen::VectorXd prior_mean = Eigen::Vector2d(0.5, -1.0);
  Eigen::MatrixXd k_mm(2, 2);
  k_mm << 2.0, 0.3, 0.3, 1.0;
  const GpPosterior post = gp_posterior(
      prior_mean, Eigen::MatrixXd(0, 0), Eigen::MatrixXd(2, 0), k_mm, 0.1,
      Eigen::VectorXd(0), Eigen::VectorXd(0));
  CHECK(post.mean == prior_mean);
  CHECK(post.cov == k_mm);
}

TEST_CASE("single observation, unit kernel, unit noise") {
  // k == 1 everywhere, sigma^2 = 1, y = 2: mean 1.0, variance 0.5.
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, 1);
  const GpPosterior post = gp_posterior(
      Eigen::VectorXd::Zero(1), ones, ones, ones, 1.0,
      Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Zero(1));
  CHECK(post.mean[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gp_posterior rejects nonconformable shapes") {
  CHECK_THROWS_AS(
      gp_posterior(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Ones(3, 3),
                   Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2),
                   0.1, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)),
      DimensionError);
}

TEST_CASE("brute-force joint conditioning oracle agrees on random instances") {
  CHECK(posterior_oracle_max_error(100, 0xBEEF) < 1e-8);
}

TEST_CASE("beta_posterior with empty history returns the prior") {
  const CSGPKernel kernel = default_kernel();
  BanditHistory history;
  history.noise_var = 0.1;
  Rng rng(3);
  const Eigen::VectorXd x = random_context(rng, 2);
  const CoefficientPosterior cp = beta_posterior(kernel, history, {x});

  CHECK(cp.mean.cwiseAbs().maxCoeff() == 0.0);
  const int J = kernel.basis.J;
  REQUIRE(cp.cov.rows() == J);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      const double expect =
          i == j ? base_kernel_eval(kernel.components[i], x, x) : 0.0;
      CHECK(cp.cov(i, j) == doctest::Approx(expect));
    }
  }
}

TEST_CASE("truncation pattern for m = 2, J = 9") {
  const Eigen::VectorXd trunc = truncation_pattern(9, 2);
  REQUIRE(trunc.size() == 18);
  int zeros = 0;
  int infs = 0;
  for (Eigen::Index i = 0; i < 18; ++i) {
    if (trunc[i] == 0.0) ++zeros;
    if (std::isinf(trunc[i])) ++infs;
  }
  CHECK(zeros == 14);
  CHECK(infs == 4);
  // Documented block layout: 7 zeros then 2 infinities per block.
  for (int b = 0; b < 2; ++b) {
    for (int j = 0; j < 7; ++j) CHECK(trunc[b * 9 + j] == 0.0);
    CHECK(std::isinf(trunc[b * 9 + 7]));
    CHECK(std::isinf(trunc[b * 9 + 8]));
  }
}

TEST_CASE("truncation pattern never depends on data") {
  const CSGPKernel kernel = default_kernel();
  Rng rng(5);
  BanditHistory h1;
  h1.noise_var = 0.1;
  BanditHistory h2;
  h2.noise_var = 0.4;
  for (int i = 0; i < 4; ++i) {
    h1.append(random_context(rng, 2), rng.uniform01(), rng.normal());
    h2.append(random_context(rng, 2), rng.uniform01(), 10.0 * rng.normal());
  }
  const Eigen::VectorXd x = random_context(rng, 2);
  CHECK(beta_posterior(kernel, h1, {x}).trunc ==
        beta_posterior(kernel, h2, {x}).trunc);
}

TEST_CASE("reward reconstruction through phi matches gp_posterior on f") {
  const CSGPKernel kernel = default_kernel();
  Rng rng(7);
  BanditHistory history;
  history.noise_var = 0.15;
  for (int i = 0; i < 5; ++i) {
    history.append(random_context(rng, 2), rng.uniform01(), rng.normal());
  }
  const auto& visited = history.rounds[2];

  const CoefficientPosterior cp =
      beta_posterior(kernel, history, {visited.context});
  const double via_beta = phi(kernel.basis, visited.action).dot(cp.mean);

  const auto pts = history.points();
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k_nn(n, n);
  Eigen::MatrixXd k_mn(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < n; ++c) {
      k_nn(i, c) = kf(kernel, pts[i].a, pts[i].x, pts[c].a, pts[c].x);
    }
    k_mn(0, i) =
        kf(kernel, visited.action, visited.context, pts[i].a, pts[i].x);
  }
  Eigen::MatrixXd k_mm(1, 1);
  k_mm(0, 0) = kf(kernel, visited.action, visited.context, visited.action,
                  visited.context);
  const GpPosterior f_post = gp_posterior(
      Eigen::VectorXd::Zero(1), k_nn, k_mn, k_mm, history.noise_var,
      history.rewards(), Eigen::VectorXd::Zero(n));
  CHECK(std::abs(via_beta - f_post.mean[0]) < 1e-8);
}

TEST_CASE("unconstrained variance: prior at empty history, shrinks with data") {
  const CSGPKernel kernel = default_kernel();
  Rng rng(11);
  const Eigen::VectorXd x = random_context(rng, 2);
  const double a = 0.6;

  BanditHistory empty;
  empty.noise_var = 0.1;
  CHECK(unconstrained_reward_variance(kernel, empty, a, x) ==
        doctest::Approx(kf(kernel, a, x, a, x)));

  BanditHistory one;
  one.noise_var = 0.1;
  one.append(x, a, 1.0);
  const double after_one = unconstrained_reward_variance(kernel, one, a, x);
  CHECK(after_one < kf(kernel, a, x, a, x));

  BanditHistory two = one;
  two.append(x, a, 0.8);
  const double after_two = unconstrained_reward_variance(kernel, two, a, x);
  CHECK(after_two < after_one);
}

TEST_CASE("variance dual-form identity on random instances") {
  CHECK(variance_dual_form_max_error(100, 0xFACE) < 1e-8);
}

TEST_CASE("posterior variance never exceeds prior variance") {
  const CSGPKernel kernel = default_kernel();
  Rng rng(13);
  BanditHistory history;
  history.noise_var = 0.1;
  for (int i = 0; i < 8; ++i) {
    history.append(random_context(rng, 2), rng.uniform01(), rng.normal());
  }
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform01();
    const Eigen::VectorXd x = random_context(rng, 2);
    CHECK(unconstrained_reward_variance(kernel, history, a, x) <=
          kf(kernel, a, x, a, x) + 1e-10);
  }
}

TEST_CASE("incremental posterior state matches the stateless route") {
  const CSGPKernel kernel = default_kernel();
  Rng rng(17);
  BanditHistory history;
  history.noise_var = 0.1;
  RewardPosterior state(kernel, 0.1);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = random_context(rng, 2);
    const double a = rng.uniform01();
    const double y = rng.normal();
    history.append(x, a, y);
    state.append(a, x, y);
  }
  const Eigen::VectorXd x_q = random_context(rng, 2);

  const CoefficientPosterior from_state = state.beta_posterior({x_q});
  const CoefficientPosterior from_history =
      beta_posterior(kernel, history, {x_q});
  CHECK((from_state.mean - from_history.mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((from_state.cov - from_history.cov).cwiseAbs().maxCoeff() < 1e-10);

  BaseKernelSpec other;
  other.lengthscale = 0.7;
  other.variance = 2.0;
  const CSGPKernel other_kernel = make_csgp_kernel(kernel.basis, other);
  state.reset_kernel(other_kernel);
  const CoefficientPosterior refit_state = state.beta_posterior({x_q});
  const CoefficientPosterior refit_free =
      beta_posterior(other_kernel, history, {x_q});
  CHECK((refit_state.mean - refit_free.mean).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("multi-context posterior covers the stacked blocks") {
  const CSGPKernel kernel = default_kernel(5, 2);  // J = 9
  Rng rng(19);
  BanditHistory history;
  history.noise_var = 0.1;
  for (int i = 0; i < 4; ++i) {
    history.append(random_context(rng, 2), rng.uniform01(), rng.normal());
  }
  const std::vector<Eigen::VectorXd> contexts = {random_context(rng, 2),
                                                 random_context(rng, 2)};
  const CoefficientPosterior cp = beta_posterior(kernel, history, contexts);
  CHECK(cp.mean.size() == 18);
  CHECK(cp.cov.rows() == 18);
  CHECK(cp.num_contexts == 2);
  CHECK(cp.J == 9);
}

}  // TEST_SUITE
