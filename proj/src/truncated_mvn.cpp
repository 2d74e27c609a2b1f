#include "csgp/truncated_mvn.hpp"

#include <cmath>
#include <limits>

#include "csgp/errors.hpp"
#include "csgp/linalg.hpp"
#include "csgp/rng.hpp"

namespace csgp {

namespace {

bool feasible(const Eigen::VectorXd& w, const Eigen::VectorXd& upper) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > upper[i]) return false;
  }
  return true;
}

// Start from the mean clamped strictly below the bound; degenerate
// coordinates (sd below `frozen_sd`) cannot move, so a mean above the bound
// there makes the truncation region massless.
Eigen::VectorXd feasible_start(const TruncatedGaussian& tg,
                               double frozen_sd) {
  const Eigen::Index d = tg.mean.size();
  Eigen::VectorXd w(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::isinf(tg.upper[i])) {
      w[i] = tg.mean[i];
      continue;
    }
    const double sd = std::sqrt(std::max(tg.cov(i, i), 0.0));
    if (sd <= frozen_sd) {
      if (tg.mean[i] > tg.upper[i]) {
        throw SamplerError(
            "infeasible truncation: degenerate coordinate above its bound");
      }
      w[i] = tg.mean[i];
      continue;
    }
    w[i] = std::min(tg.mean[i], tg.upper[i] - 1e-6 * sd);
  }
  if (!feasible(w, tg.upper)) {
    throw SamplerError("failed to construct a feasible start point");
  }
  return w;
}

}  // namespace

SampleBatch ess_sample(const TruncatedGaussian& tg, int n, int burn_in,
                       std::uint64_t seed) {
  const Eigen::Index d = tg.mean.size();
  if (tg.cov.rows() != d || tg.cov.cols() != d || tg.upper.size() != d) {
    throw DimensionError("ess_sample: inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (tg.upper[i] == -std::numeric_limits<double>::infinity()) {
      throw SamplerError("truncation region has zero prior mass");
    }
  }

  Eigen::MatrixXd l = psd_factor(tg.cov);
  // Freeze numerically degenerate coordinates: a row with negligible norm
  // contributes sub-ulp noise that can never satisfy a boundary-hugging
  // constraint, so it is treated as exactly deterministic.
  const double max_sd = std::sqrt(std::max(tg.cov.diagonal().maxCoeff(), 0.0));
  const double frozen_sd = 1e-12 * std::max(max_sd, 1e-300);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (l.row(i).norm() <= frozen_sd) {
      l.row(i).setZero();
    }
  }

  SampleBatch batch;
  batch.seed = seed;
  batch.burn_in = burn_in;
  batch.draws.resize(n, d);

  Rng rng(seed);
  Eigen::VectorXd z(d);

  // The chain state is kept centered; proposals reconstruct mean + state so
  // that a shrinking bracket converges bitwise onto the current (feasible)
  // point instead of collapsing on round-off.
  Eigen::VectorXd centered = feasible_start(tg, frozen_sd) - tg.mean;
  Eigen::VectorXd w = tg.mean + centered;
  if (!feasible(w, tg.upper)) {
    // Round-off from the mean reconstruction crossed the bound; nudge back.
    for (Eigen::Index i = 0; i < d; ++i) {
      if (w[i] > tg.upper[i]) {
        centered[i] = std::nextafter(centered[i], -1e300);
        w[i] = tg.mean[i] + centered[i];
      }
    }
    if (!feasible(w, tg.upper)) {
      throw SamplerError("failed to construct a feasible start point");
    }
  }

  const auto transition = [&]() {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
    const Eigen::VectorXd nu_vec = l * z;  // centered ellipse partner
    const Eigen::VectorXd current = centered;
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    double lo = theta - 2.0 * M_PI;
    double hi = theta;
    for (int iter = 0; iter <= kMaxShrink; ++iter) {
      const Eigen::VectorXd prop =
          current * std::cos(theta) + nu_vec * std::sin(theta);
      const Eigen::VectorXd cand = tg.mean + prop;
      if (feasible(cand, tg.upper)) {
        centered = prop;
        w = cand;
        return;
      }
      ++batch.ess_moves;
      if (theta < 0.0) {
        lo = theta;
      } else {
        hi = theta;
      }
      theta = rng.uniform(lo, hi);
    }
    throw SamplerError(
        "elliptical slice collapsed: covariance numerically degenerate");
  };

  for (int i = 0; i < burn_in; ++i) transition();
  for (int i = 0; i < n; ++i) {
    transition();
    batch.draws.row(i) = w.transpose();
  }

  // Feasibility is a hard guarantee, not a statistical one.
  for (int i = 0; i < n; ++i) {
    if (!feasible(batch.draws.row(i).transpose(), tg.upper)) {
      throw SamplerError("internal error: infeasible retained draw");
    }
  }
  return batch;
}

Eigen::VectorXd batch_means_se(const Eigen::MatrixXd& draws) {
  const Eigen::Index n = draws.rows();
  const Eigen::Index d = draws.cols();
  const Eigen::Index b =
      std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::sqrt(
                                    static_cast<double>(n))));
  const Eigen::Index m = n / b;
  if (m < 1) return Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd means(b, d);
  for (Eigen::Index k = 0; k < b; ++k) {
    means.row(k) = draws.middleRows(k * m, m).colwise().mean();
  }
  const Eigen::RowVectorXd grand = means.colwise().mean();
  Eigen::VectorXd se(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (means.col(j).array() - grand[j]).square().sum() / (b - 1);
    se[j] = std::sqrt(var / b);
  }
  return se;
}

TruncMean trunc_mean(const TruncatedGaussian& tg, int n, std::uint64_t seed,
                     int burn_in) {
  const SampleBatch batch = ess_sample(tg, n, burn_in, seed);
  TruncMean out;
  out.mean = batch.draws.colwise().mean();
  out.se = batch_means_se(batch.draws);
  return out;
}

namespace {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse Mills ratio pdf(a)/cdf(a); asymptotic expansion when cdf underflows.
double inverse_mills(double alpha) {
  if (alpha < -37.0) {
    const double x = -alpha;
    return x + 1.0 / x - 2.0 / (x * x * x);
  }
  return norm_pdf(alpha) / norm_cdf(alpha);
}

}  // namespace

double univariate_trunc_mean(double mu, double var, double nu) {
  if (!(var > 0.0)) throw DomainError("univariate_trunc_mean: var must be > 0");
  if (std::isinf(nu)) return mu;
  const double sigma = std::sqrt(var);
  const double alpha = (nu - mu) / sigma;
  return mu - sigma * inverse_mills(alpha);
}

TailCheckReport subgaussian_tail_check(const TruncatedGaussian& tg,
                                       const Eigen::VectorXd& direction,
                                       const std::vector<double>& levels,
                                       int n, std::uint64_t seed) {
  const double var_c = direction.dot(tg.cov * direction);
  if (!(var_c > 0.0)) {
    throw DomainError("subgaussian_tail_check: c^T Sigma c must be > 0");
  }
  const SampleBatch batch = ess_sample(tg, n, /*burn_in=*/500, seed);
  const Eigen::VectorXd s = batch.draws * direction;
  const double center = s.mean();

  TailCheckReport report;
  report.sigma_c = std::sqrt(var_c);
  report.n = n;
  constexpr double kZ99 = 2.3263478740408408;
  for (const double v : levels) {
    const double freq =
        static_cast<double>(((s.array() - center).abs() > v).count()) / n;
    const double bound = 2.0 * std::exp(-v * v / (2.0 * var_c));
    const double clamped = std::min(bound, 1.0);
    const double margin =
        kZ99 * std::sqrt(std::max(clamped * (1.0 - clamped), 1.0 / n) /
                         static_cast<double>(n));
    const bool ok = freq <= bound + margin;
    report.levels.push_back(v);
    report.frequencies.push_back(freq);
    report.bounds.push_back(bound);
    report.margins.push_back(margin);
    report.pass.push_back(ok);
    report.all_pass = report.all_pass && ok;
  }
  return report;
}

}  // namespace csgp
