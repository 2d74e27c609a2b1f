#include <doctest.h>

#include <cmath>
#include <limits>

#include "csgp/errors.hpp"
#include "csgp/rng.hpp"
#include "csgp/truncated_mvn.hpp"
#include "csgp/validation.hpp"

using namespace csgp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TruncatedGaussian standard_1d(double upper) {
  TruncatedGaussian tg;
  tg.mean = Eigen::VectorXd::Zero(1);
  tg.cov = Eigen::MatrixXd::Identity(1, 1);
  tg.upper = Eigen::VectorXd::Constant(1, upper);
  return tg;
}

}  // namespace

TEST_SUITE("truncated_mvn") {

TEST_CASE("univariate closed forms") {
  CHECK(univariate_trunc_mean(0.0, 1.0, kInf) == 0.0);
  // -2*pdf(0) for the standard normal truncated at zero.
  CHECK(univariate_trunc_mean(0.0, 1.0, 0.0) ==
        doctest::Approx(-0.7978845608028654).epsilon(1e-12));
  // mu - sigma pdf(alpha)/cdf(alpha) at mu=1, var=4, nu=0.
  CHECK(univariate_trunc_mean(1.0, 4.0, 0.0) ==
        doctest::Approx(-1.2821555407361290).epsilon(1e-10));
  CHECK_THROWS_AS(univariate_trunc_mean(0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("univariate far-tail asymptotics stay finite and ordered") {
  // Deep truncation: the mean approaches the bound from below.
  const double far = univariate_trunc_mean(0.0, 1.0, -50.0);
  CHECK(std::isfinite(far));
  CHECK(far < -50.0);
  CHECK(far > -50.1);
  // Continuity across the asymptotic switch at alpha = -37.
  const double left = univariate_trunc_mean(0.0, 1.0, -37.5);
  const double right = univariate_trunc_mean(0.0, 1.0, -36.5);
  CHECK(left < right);
  CHECK(std::abs((left + 37.5 + 1.0 / 37.5) ) < 1e-3);
}

TEST_CASE("unconstrained sampling recovers the mean within 3 SE") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector3d(0.5, -1.0, 2.0);
  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, 0.2, 0.0, 0.2, 1.0, 0.3, 0.0, 0.3, 1.0;
  tg.cov = cov;
  tg.upper = Eigen::VectorXd::Constant(3, kInf);
  const TruncMean tm = trunc_mean(tg, 10000, 0xA1);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(tm.mean[i] - tg.mean[i]) <= 3.0 * tm.se[i]);
  }
}

TEST_CASE("1-D standard normal truncated at zero") {
  const TruncMean tm = trunc_mean(standard_1d(0.0), 10000, 0xB2);
  CHECK(std::abs(tm.mean[0] + 0.7978845608028654) <= 3.0 * tm.se[0]);
  CHECK(tm.se[0] <= 0.01);
}

TEST_CASE("2-D correlated case matches a rejection-sampling oracle") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector2d(0.0, 0.0);
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  tg.cov = cov;
  tg.upper = Eigen::Vector2d(0.0, kInf);

  // Rejection oracle: sample the untruncated pair, keep w1 <= 0
  // (acceptance rate 1/2).
  Rng rng(0xC3);
  const Eigen::MatrixXd l = cov.llt().matrixL();
  double sum1 = 0.0;
  double sum_sq1 = 0.0;
  int kept = 0;
  int proposals = 0;
  while (kept < 20000) {
    ++proposals;
    const Eigen::Vector2d z(rng.normal(), rng.normal());
    const Eigen::Vector2d w = l * z;
    if (w[0] <= 0.0) {
      sum1 += w[0];
      sum_sq1 += w[0] * w[0];
      ++kept;
    }
  }
  const double oracle_mean = sum1 / kept;
  const double oracle_se =
      std::sqrt((sum_sq1 / kept - oracle_mean * oracle_mean) / kept);
  CHECK(std::abs(static_cast<double>(kept) / proposals - 0.5) < 0.02);

  const TruncMean tm = trunc_mean(tg, 10000, 0xD4);
  const double combined =
      std::sqrt(tm.se[0] * tm.se[0] + oracle_se * oracle_se);
  CHECK(std::abs(tm.mean[0] - oracle_mean) <= 3.0 * combined);
}

TEST_CASE("diagonal covariance factorizes into univariate truncated means") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector3d(0.5, -0.25, 1.0);
  tg.cov = Eigen::Vector3d(1.0, 4.0, 0.25).asDiagonal();
  tg.upper = Eigen::Vector3d(0.0, 1.0, kInf);
  const TruncMean tm = trunc_mean(tg, 10000, 0xE5);
  for (int i = 0; i < 3; ++i) {
    const double expect =
        univariate_trunc_mean(tg.mean[i], tg.cov(i, i), tg.upper[i]);
    CHECK(std::abs(tm.mean[i] - expect) <= 3.0 * tm.se[i]);
  }
}

TEST_CASE("truncated mean sits below the unconstrained mean on bound coords") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector2d(0.5, 0.25);  // positive means, truncated at 0
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.4, 0.4, 1.0;
  tg.cov = cov;
  tg.upper = Eigen::Vector2d(0.0, 0.0);
  const TruncMean tm = trunc_mean(tg, 8000, 0xF6);
  CHECK(tm.mean[0] < tg.mean[0]);
  CHECK(tm.mean[1] < tg.mean[1]);
}

TEST_CASE("every retained draw is feasible, exactly") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector3d(1.0, 2.0, 0.0);
  Eigen::MatrixXd cov(3, 3);
  cov << 2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 1.5;
  tg.cov = cov;
  tg.upper = Eigen::Vector3d(0.0, -1.0, kInf);
  const SampleBatch batch = ess_sample(tg, 5000, 100, 0x77);
  for (Eigen::Index i = 0; i < batch.draws.rows(); ++i) {
    CHECK(batch.draws(i, 0) <= 0.0);
    CHECK(batch.draws(i, 1) <= -1.0);
  }
  CHECK(batch.ess_moves > 0);  // shrinkage happened and was counted
}

TEST_CASE("degenerate coordinate above its bound is rejected up front") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector2d(1.0, 0.0);
  tg.cov = Eigen::MatrixXd::Zero(2, 2);
  tg.cov(1, 1) = 1.0;
  tg.upper = Eigen::Vector2d(0.0, kInf);  // coord 0: point mass at 1 > 0
  CHECK_THROWS_AS(ess_sample(tg, 10, 10, 1), SamplerError);
}

TEST_CASE("degenerate coordinate below its bound stays put") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector2d(-0.5, 0.0);
  tg.cov = Eigen::MatrixXd::Zero(2, 2);
  tg.cov(1, 1) = 1.0;
  tg.upper = Eigen::Vector2d(0.0, kInf);
  const SampleBatch batch = ess_sample(tg, 200, 50, 2);
  for (Eigen::Index i = 0; i < batch.draws.rows(); ++i) {
    CHECK(batch.draws(i, 0) == -0.5);
  }
}

TEST_CASE("determinism given seed") {
  const TruncatedGaussian tg = standard_1d(0.0);
  const SampleBatch b1 = ess_sample(tg, 500, 100, 0xAB);
  const SampleBatch b2 = ess_sample(tg, 500, 100, 0xAB);
  CHECK(b1.draws == b2.draws);
}

TEST_CASE("two independent seeds agree within 4 combined SEs") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector2d(0.8, -0.2);
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, -0.3, -0.3, 1.0;
  tg.cov = cov;
  tg.upper = Eigen::Vector2d(0.0, 0.5);
  const SampleBatch b1 = ess_sample(tg, 12000, 200, 101);
  const SampleBatch b2 = ess_sample(tg, 12000, 200, 202);
  const Eigen::VectorXd m1 = b1.draws.colwise().mean();
  const Eigen::VectorXd m2 = b2.draws.colwise().mean();
  const Eigen::VectorXd se1 = batch_means_se(b1.draws);
  const Eigen::VectorXd se2 = batch_means_se(b2.draws);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(m1[i] - m2[i]) <=
          4.0 * std::sqrt(se1[i] * se1[i] + se2[i] * se2[i]));
  }
}

TEST_CASE("sub-Gaussian tail check: unconstrained Gaussian at v = 2 sigma") {
  TruncatedGaussian tg;
  tg.mean = Eigen::Vector2d(0.0, 0.0);
  tg.cov = Eigen::MatrixXd::Identity(2, 2);
  tg.upper = Eigen::VectorXd::Constant(2, kInf);
  const Eigen::VectorXd c = Eigen::Vector2d(1.0, 1.0);
  const double sigma_c = std::sqrt(2.0);
  const TailCheckReport report =
      subgaussian_tail_check(tg, c, {2.0 * sigma_c}, 20000, 0x99);
  REQUIRE(report.pass.size() == 1);
  // Bound 2 e^-2 ~ 0.2707 vs true two-sided tail ~ 0.0455.
  CHECK(report.bounds[0] == doctest::Approx(0.2706705664732254));
  CHECK(report.frequencies[0] < 0.06);
  CHECK(report.all_pass);
}

TEST_CASE("sub-Gaussian tail check: v = 0 is trivially satisfied") {
  TruncatedGaussian tg = standard_1d(0.0);
  const TailCheckReport report = subgaussian_tail_check(
      tg, Eigen::VectorXd::Ones(1), {0.0}, 2000, 0x42);
  CHECK(report.bounds[0] == 2.0);
  CHECK(report.all_pass);
}

TEST_CASE("sub-Gaussian bound holds on a real bandit-round posterior") {
  const auto posteriors = harvest_round_posteriors(2, 0x1234);
  REQUIRE(!posteriors.empty());
  const auto& cp = posteriors.back();
  const TruncatedGaussian tg{cp.mean, cp.cov, cp.trunc};
  Rng rng(0xDD);
  Eigen::VectorXd c(cp.mean.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
  const double sigma_c = std::sqrt(c.dot(tg.cov * c));
  const TailCheckReport report = subgaussian_tail_check(
      tg, c, {sigma_c, 2.0 * sigma_c, 3.0 * sigma_c}, 20000, 0xEE);
  CHECK(report.all_pass);
}

}  // TEST_SUITE
