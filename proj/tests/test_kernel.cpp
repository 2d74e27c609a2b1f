#include <doctest.h>

#include <cmath>

#include "csgp/errors.hpp"
#include "csgp/kernel.hpp"
#include "csgp/linalg.hpp"
#include "csgp/rng.hpp"

using namespace csgp;

namespace {

Eigen::VectorXd random_context(Rng& rng, int d) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

CSGPKernel toy_kernel(int knots = 1, int order = 1) {
  BaseKernelSpec base;
  return make_csgp_kernel(build_basis(knots, order), base);
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("gaussian kernel values") {
  BaseKernelSpec spec;
  Eigen::Vector2d x(0.3, -0.4);
  CHECK(base_kernel_eval(spec, x, x) == doctest::Approx(1.0));

  Eigen::Vector2d x2 = x + Eigen::Vector2d(1.0, 0.0);  // distance 1
  CHECK(base_kernel_eval(spec, x, x2) ==
        doctest::Approx(0.6065306597126334).epsilon(1e-12));

  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd a = random_context(rng, 3);
    const Eigen::VectorXd b = random_context(rng, 3);
    CHECK(base_kernel_eval(spec, a, b) == base_kernel_eval(spec, b, a));
  }

  CHECK_THROWS_AS(
      base_kernel_eval(spec, Eigen::Vector2d(0, 0), Eigen::Vector3d(0, 0, 0)),
      DimensionError);
}

TEST_CASE("matern kernel against the nu=5/2 closed form") {
  BaseKernelSpec spec;
  spec.family = KernelFamily::kMatern;
  spec.matern_nu = 2.5;
  spec.lengthscale = 0.7;
  spec.variance = 1.3;

  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd a = random_context(rng, 2);
    const Eigen::VectorXd b = random_context(rng, 2);
    const double r = (a - b).norm();
    const double s = std::sqrt(5.0) * r / spec.lengthscale;
    const double closed =
        spec.variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    CHECK(base_kernel_eval(spec, a, b) ==
          doctest::Approx(closed).epsilon(1e-10));
  }
  CHECK(base_kernel_eval(spec, Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)) ==
        doctest::Approx(spec.variance));

  BaseKernelSpec bad = spec;
  bad.matern_nu = 1.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("kf at a = a' = 0 reduces to the constant-feature kernel") {
  // phi(0) = (0,...,0,0,1): only the constant component survives.
  const CSGPKernel kernel = toy_kernel(5, 2);
  Rng rng(5);
  const Eigen::VectorXd x = random_context(rng, 3);
  CHECK(kf(kernel, 0.0, x, 0.0, x) == doctest::Approx(1.0));
}

TEST_CASE("kf matches the explicit 4-term sum on the J=4 toy basis") {
  const CSGPKernel kernel = toy_kernel();  // J = 4
  Rng rng(9);
  const Eigen::VectorXd x = random_context(rng, 2);
  const Eigen::VectorXd x2 = random_context(rng, 2);
  const double a = 0.3;
  const double a2 = 0.8;

  const Eigen::VectorXd p1 = phi(kernel.basis, a);
  const Eigen::VectorXd p2 = phi(kernel.basis, a2);
  double expected = 0.0;
  for (int j = 0; j < 4; ++j) {
    expected +=
        p1[j] * base_kernel_eval(kernel.components[j], x, x2) * p2[j];
  }
  CHECK(kf(kernel, a, x, a2, x2) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(kf(kernel, a, x, a2, x2) ==
        doctest::Approx(kf(kernel, a2, x2, a, x)));
}

TEST_CASE("gram over random points is PSD after jitter") {
  const CSGPKernel kernel = toy_kernel(5, 2);
  Rng rng(13);
  std::vector<ActionContext> pts;
  for (int i = 0; i < 20; ++i) {
    pts.push_back({rng.uniform01(), random_context(rng, 3)});
  }
  Eigen::MatrixXd k = gram(kernel, pts);
  k.diagonal().array() += 1e-8;
  CHECK_NOTHROW(jittered_cholesky(k));
}

TEST_CASE("kf_beta basics and the Eq. 5/6 consistency identity") {
  const CSGPKernel kernel = toy_kernel(3, 2);  // J = 7
  const int J = kernel.basis.J;
  Rng rng(17);
  const Eigen::VectorXd x = random_context(rng, 2);
  const Eigen::VectorXd x2 = random_context(rng, 2);

  // Constant feature: kf_beta = k_J(x, x2) for any action.
  for (const double a : {0.0, 0.4, 1.0}) {
    CHECK(kf_beta(kernel, a, x, J - 1, x2) ==
          doctest::Approx(base_kernel_eval(kernel.components.back(), x, x2)));
  }
  // C-spline features vanish at a = 0.
  for (int j = 0; j < J - 2; ++j) {
    CHECK(kf_beta(kernel, 0.0, x, j, x2) == 0.0);
  }
  CHECK_THROWS_AS(kf_beta(kernel, 0.5, x, J, x2), DomainError);
  CHECK_THROWS_AS(kf_beta(kernel, 0.5, x, -1, x2), DomainError);

  // sum_j kf_beta((a,x), j, x') phi_j(a') == kf((a,x), (a',x')).
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform01();
    const double a2 = rng.uniform01();
    const Eigen::VectorXd u = random_context(rng, 2);
    const Eigen::VectorXd v = random_context(rng, 2);
    const Eigen::VectorXd p2 = phi(kernel.basis, a2);
    double total = 0.0;
    for (int j = 0; j < J; ++j) {
      total += kf_beta(kernel, a, u, j, v) * p2[j];
    }
    CHECK(std::abs(total - kf(kernel, a, u, a2, v)) < 1e-12);
  }
}

TEST_CASE("gram agrees with elementwise kf and with the serial reference") {
  const CSGPKernel kernel = toy_kernel(5, 2);
  Rng rng(21);
  std::vector<ActionContext> pts;
  for (int i = 0; i < 17; ++i) {
    pts.push_back({rng.uniform01(), random_context(rng, 3)});
  }
  const Eigen::MatrixXd k_par = gram(kernel, pts);
  const Eigen::MatrixXd k_ser = gram_serial(kernel, pts);
  CHECK((k_par - k_ser).cwiseAbs().maxCoeff() == 0.0);

  for (int i = 0; i < 17; ++i) {
    for (int c = 0; c < 17; ++c) {
      CHECK(k_ser(i, c) ==
            kf(kernel, pts[i].a, pts[i].x, pts[c].a, pts[c].x));
    }
  }

  // Single point: 1x1 matrix holding the prior variance.
  const std::vector<ActionContext> one = {pts[0]};
  const Eigen::MatrixXd k1 = gram(kernel, one);
  REQUIRE(k1.rows() == 1);
  CHECK(k1(0, 0) == kf(kernel, pts[0].a, pts[0].x, pts[0].a, pts[0].x));

  // Permuting points permutes rows/columns identically.
  std::vector<ActionContext> rev(pts.rbegin(), pts.rend());
  const Eigen::MatrixXd k_rev = gram(kernel, rev);
  const Eigen::Index n = k_ser.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < n; ++c) {
      CHECK(k_rev(i, c) == k_ser(n - 1 - i, n - 1 - c));
    }
  }
}

TEST_CASE("log marginal likelihood closed form at n = 1") {
  const CSGPKernel kernel = toy_kernel(5, 2);
  BanditHistory history;
  history.noise_var = 0.3;
  history.append(Eigen::Vector2d(0.1, 0.2), 0.5, 0.0);

  const double prior_var = kf(kernel, 0.5, history.rounds[0].context, 0.5,
                              history.rounds[0].context);
  const double expected = -0.5 * std::log(prior_var + 0.3) -
                          0.5 * std::log(2.0 * M_PI);
  CHECK(log_marginal_likelihood(kernel, 0.3, history) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log marginal likelihood is invariant to observation order") {
  const CSGPKernel kernel = toy_kernel(3, 2);
  Rng rng(23);
  BanditHistory fwd;
  fwd.noise_var = 0.1;
  for (int i = 0; i < 6; ++i) {
    fwd.append(random_context(rng, 2), rng.uniform01(), rng.normal());
  }
  BanditHistory rev;
  rev.noise_var = 0.1;
  for (auto it = fwd.rounds.rbegin(); it != fwd.rounds.rend(); ++it) {
    rev.append(it->context, it->action, it->reward);
  }
  CHECK(log_marginal_likelihood(kernel, 0.1, fwd) ==
        doctest::Approx(log_marginal_likelihood(kernel, 0.1, rev))
            .epsilon(1e-10));
}

TEST_CASE("duplicating an observation cannot raise per-point evidence") {
  // Mismatched (too small) noise plus an inconsistent duplicate: the
  // per-observation likelihood must not go up.
  const CSGPKernel kernel = toy_kernel(3, 2);
  Rng rng(29);
  BanditHistory base;
  base.noise_var = 0.01;
  for (int i = 0; i < 5; ++i) {
    base.append(random_context(rng, 2), rng.uniform01(), rng.normal() * 2.0);
  }
  BanditHistory dup = base;
  const auto& last = base.rounds.back();
  dup.append(last.context, last.action, last.reward + 1.0);

  const double per_point_base =
      log_marginal_likelihood(kernel, 0.01, base) / base.size();
  const double per_point_dup =
      log_marginal_likelihood(kernel, 0.01, dup) / dup.size();
  CHECK(per_point_dup <= per_point_base);
}

TEST_CASE("fit_hyperparams respects the budget guard") {
  const CSGPKernel kernel = toy_kernel(3, 2);
  Rng rng(31);
  BanditHistory history;
  history.noise_var = 0.1;
  for (int i = 0; i < 8; ++i) {
    history.append(random_context(rng, 2), rng.uniform01(), rng.normal());
  }

  const CSGPKernel unchanged = fit_hyperparams(kernel, 0.1, history, 0);
  CHECK(unchanged.components[0].lengthscale ==
        kernel.components[0].lengthscale);
  CHECK(unchanged.components[0].variance == kernel.components[0].variance);

  const double before = log_marginal_likelihood(kernel, 0.1, history);
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const CSGPKernel fitted =
        fit_hyperparams(kernel, 0.1, history, 30, seed);
    CHECK(log_marginal_likelihood(fitted, 0.1, history) >= before);
  }
}

TEST_CASE("fit_hyperparams recovers a known lengthscale") {
  // Data drawn from a GP with lengthscale 2; the fit should land in [1, 4].
  BaseKernelSpec truth;
  truth.lengthscale = 2.0;
  truth.variance = 1.0;
  const SplineBasisSpec basis = build_basis(3, 2);
  const CSGPKernel true_kernel = make_csgp_kernel(basis, truth);

  Rng rng(37);
  std::vector<ActionContext> pts;
  for (int i = 0; i < 200; ++i) {
    pts.push_back({rng.uniform01(), random_context(rng, 2) * 3.0});
  }
  Eigen::MatrixXd k = gram(true_kernel, pts);
  const Eigen::MatrixXd l = psd_factor(k);
  Eigen::VectorXd z(200);
  for (int i = 0; i < 200; ++i) z[i] = rng.normal();
  const Eigen::VectorXd f = l * z;

  BanditHistory history;
  history.noise_var = 0.1;
  for (int i = 0; i < 200; ++i) {
    history.append(pts[i].x, pts[i].a,
                   f[i] + std::sqrt(0.1) * rng.normal());
  }

  BaseKernelSpec init;
  init.lengthscale = 0.5;
  init.variance = 0.5;
  const CSGPKernel fitted = fit_hyperparams(
      make_csgp_kernel(basis, init), 0.1, history, 60, 0xF17);
  const double recovered = fitted.components[0].lengthscale;
  CHECK(recovered >= 1.0);
  CHECK(recovered <= 4.0);
}

}  // TEST_SUITE
