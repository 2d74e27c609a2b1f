#include "csgp/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "csgp/errors.hpp"
#include "csgp/linalg.hpp"
#include "csgp/rng.hpp"

namespace csgp {

std::string kernel_family_name(KernelFamily family) {
  return family == KernelFamily::kGaussian ? "gaussian" : "matern";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "matern") return KernelFamily::kMatern;
  throw ConfigError("unknown kernel family: " + name);
}

void BaseKernelSpec::validate() const {
  if (!(lengthscale > 0.0)) throw DomainError("lengthscale must be > 0");
  if (!(variance > 0.0)) throw DomainError("variance must be > 0");
  if (family == KernelFamily::kMatern && !(matern_nu > 2.0)) {
    throw DomainError("matern_nu must be > 2 (smoothness requirement)");
  }
}

namespace {

double matern_eval(double nu, double r_over_l, double variance) {
  if (r_over_l < 1e-10) return variance;
  const double z = std::sqrt(2.0 * nu) * r_over_l;
  const double log_coef =
      (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(z);
  return variance * std::exp(log_coef) * std::cyl_bessel_k(nu, z);
}

double kernel_from_distance(const BaseKernelSpec& spec, double r) {
  const double s = r / spec.lengthscale;
  if (spec.family == KernelFamily::kGaussian) {
    return spec.variance * std::exp(-0.5 * s * s);
  }
  return matern_eval(spec.matern_nu, s, spec.variance);
}

bool same_hyperparams(const BaseKernelSpec& a, const BaseKernelSpec& b) {
  return a.family == b.family && a.lengthscale == b.lengthscale &&
         a.variance == b.variance && a.matern_nu == b.matern_nu;
}

}  // namespace

double base_kernel_eval(const BaseKernelSpec& spec, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x2) {
  if (x.size() != x2.size()) {
    throw DimensionError("base_kernel_eval: context dimension mismatch");
  }
  return kernel_from_distance(spec, (x - x2).norm());
}

Eigen::VectorXd CSGPKernel::mean_beta(const Eigen::VectorXd& x) const {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(basis.J);
  for (std::size_t j = 0; j < mean_fns.size(); ++j) {
    if (mean_fns[j]) mu[static_cast<Eigen::Index>(j)] = mean_fns[j](x);
  }
  return mu;
}

double CSGPKernel::mean_f(double a, const Eigen::VectorXd& x) const {
  if (mean_fns.empty()) return 0.0;
  return phi(basis, a).dot(mean_beta(x));
}

CSGPKernel make_csgp_kernel(const SplineBasisSpec& basis,
                            const BaseKernelSpec& component, bool tied) {
  component.validate();
  CSGPKernel kernel;
  kernel.basis = basis;
  kernel.components.assign(static_cast<std::size_t>(basis.J), component);
  kernel.tied = tied;
  return kernel;
}

double kf(const CSGPKernel& kernel, double a, const Eigen::VectorXd& x,
          double a2, const Eigen::VectorXd& x2) {
  const Eigen::VectorXd p1 = phi(kernel.basis, a);
  const Eigen::VectorXd p2 = phi(kernel.basis, a2);
  double out = 0.0;
  double kx = 0.0;
  for (int j = 0; j < kernel.basis.J; ++j) {
    const auto& comp = kernel.components[static_cast<std::size_t>(j)];
    if (j == 0 || !same_hyperparams(comp, kernel.components[j - 1])) {
      kx = base_kernel_eval(comp, x, x2);
    }
    out += kx * (p1[j] * p2[j]);
  }
  return out;
}

double kf_beta(const CSGPKernel& kernel, double a, const Eigen::VectorXd& x,
               int j, const Eigen::VectorXd& x2) {
  if (j < 0 || j >= kernel.basis.J) {
    throw DomainError("kf_beta: coefficient index out of range");
  }
  const Eigen::VectorXd p = phi(kernel.basis, a);
  return p[j] *
         base_kernel_eval(kernel.components[static_cast<std::size_t>(j)], x,
                          x2);
}

namespace {

// Shared Gram assembly: precomputes the feature vectors once, then fills the
// upper triangle entrywise. Entries are independent; the OpenMP and serial
// paths produce identical values.
template <bool Parallel>
Eigen::MatrixXd gram_impl(const CSGPKernel& kernel,
                          const std::vector<ActionContext>& points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  if (n == 0) throw DomainError("gram: empty point list");
  Eigen::MatrixXd phis(kernel.basis.J, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phis.col(i) = phi(kernel.basis, points[static_cast<std::size_t>(i)].a);
  }
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(static) if (Parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = i; c < n; ++c) {
      double out = 0.0;
      double kx = 0.0;
      for (int j = 0; j < kernel.basis.J; ++j) {
        const auto& comp = kernel.components[static_cast<std::size_t>(j)];
        if (j == 0 || !same_hyperparams(comp, kernel.components[j - 1])) {
          kx = base_kernel_eval(comp, points[static_cast<std::size_t>(i)].x,
                                points[static_cast<std::size_t>(c)].x);
        }
        out += kx * (phis(j, i) * phis(j, c));
      }
      k(i, c) = out;
      k(c, i) = out;
    }
  }
  return k;
}

template <bool Parallel>
Eigen::MatrixXd base_gram_impl(const BaseKernelSpec& spec,
                               const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw DomainError("base_gram: empty point list");
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(static) if (Parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = i; c < n; ++c) {
      const double v =
          kernel_from_distance(spec, (points.row(i) - points.row(c)).norm());
      k(i, c) = v;
      k(c, i) = v;
    }
  }
  return k;
}

}  // namespace

Eigen::MatrixXd gram_serial(const CSGPKernel& kernel,
                            const std::vector<ActionContext>& points) {
  return gram_impl<false>(kernel, points);
}

Eigen::MatrixXd gram(const CSGPKernel& kernel,
                     const std::vector<ActionContext>& points) {
  return gram_impl<true>(kernel, points);
}

Eigen::MatrixXd base_gram_serial(const BaseKernelSpec& spec,
                                 const Eigen::MatrixXd& points) {
  return base_gram_impl<false>(spec, points);
}

Eigen::MatrixXd base_gram(const BaseKernelSpec& spec,
                          const Eigen::MatrixXd& points) {
  return base_gram_impl<true>(spec, points);
}

namespace {

double gaussian_evidence(const Eigen::MatrixXd& k, double noise_var,
                         const Eigen::VectorXd& centered_y) {
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd sys = k;
  sys.diagonal().array() += noise_var;
  const Eigen::MatrixXd l = jittered_cholesky(sys);
  const Eigen::VectorXd alpha = cholesky_solve(l, centered_y);
  return -0.5 * centered_y.dot(alpha) - 0.5 * cholesky_logdet(l) -
         0.5 * n * std::log(2.0 * M_PI);
}

}  // namespace

double log_marginal_likelihood(const CSGPKernel& kernel, double noise_var,
                               const BanditHistory& history) {
  if (history.empty()) {
    throw DomainError("log_marginal_likelihood: empty history");
  }
  const auto pts = history.points();
  Eigen::VectorXd y = history.rewards();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] -= kernel.mean_f(pts[i].a, pts[i].x);
  }
  return gaussian_evidence(gram(kernel, pts), noise_var, y);
}

double base_log_marginal_likelihood(const BaseKernelSpec& spec,
                                    double noise_var,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& y) {
  return gaussian_evidence(base_gram(spec, points), noise_var, y);
}

namespace {

// Guarded maximization in log-parameter space: seeded random multistart in a
// wide box followed by a shrinking pattern search around the incumbent.
// `evaluate` may throw on numerically bad candidates; those are skipped.
Eigen::VectorXd maximize_guarded(
    const std::function<double(const Eigen::VectorXd&)>& evaluate,
    const Eigen::VectorXd& init, const Eigen::VectorXd& lo,
    const Eigen::VectorXd& hi, int budget, std::uint64_t seed) {
  Eigen::VectorXd best = init;
  double best_val;
  try {
    best_val = evaluate(init);
  } catch (const Error&) {
    return init;
  }
  if (budget <= 0) return init;

  int evals = 0;
  Rng rng(derive_seed(seed, 0x9f17));
  const Eigen::Index p = init.size();

  const auto try_point = [&](const Eigen::VectorXd& cand) {
    if (evals >= budget) return false;
    ++evals;
    try {
      const double v = evaluate(cand);
      if (v > best_val) {
        best_val = v;
        best = cand;
        return true;
      }
    } catch (const Error&) {
    }
    return false;
  };

  const int n_random = std::max(budget / 3, 1);
  for (int i = 0; i < n_random && evals < budget; ++i) {
    Eigen::VectorXd cand(p);
    for (Eigen::Index d = 0; d < p; ++d) cand[d] = rng.uniform(lo[d], hi[d]);
    try_point(cand);
  }

  double step = 1.0;
  while (evals < budget && step > 1e-3) {
    bool improved = false;
    for (Eigen::Index d = 0; d < p && evals < budget; ++d) {
      for (const double dir : {+1.0, -1.0}) {
        Eigen::VectorXd cand = best;
        cand[d] = std::clamp(cand[d] + dir * step, lo[d], hi[d]);
        if (try_point(cand)) improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

CSGPKernel fit_hyperparams(const CSGPKernel& kernel, double noise_var,
                           const BanditHistory& history, int budget,
                           std::uint64_t seed) {
  if (history.size() < 2) {
    throw DomainError("fit_hyperparams: need at least two observations");
  }
  if (budget <= 0) return kernel;

  const auto with_params = [&](const Eigen::VectorXd& logp) {
    CSGPKernel cand = kernel;
    if (kernel.tied) {
      for (auto& comp : cand.components) {
        comp.lengthscale = std::exp(logp[0]);
        comp.variance = std::exp(logp[1]);
      }
    } else {
      for (std::size_t j = 0; j < cand.components.size(); ++j) {
        cand.components[j].lengthscale =
            std::exp(logp[2 * static_cast<Eigen::Index>(j)]);
        cand.components[j].variance =
            std::exp(logp[2 * static_cast<Eigen::Index>(j) + 1]);
      }
    }
    return cand;
  };

  const Eigen::Index p =
      kernel.tied ? 2 : 2 * static_cast<Eigen::Index>(kernel.components.size());
  Eigen::VectorXd init(p), lo(p), hi(p);
  for (Eigen::Index d = 0; d < p; d += 2) {
    const auto& comp =
        kernel.components[kernel.tied ? 0 : static_cast<std::size_t>(d / 2)];
    init[d] = std::log(comp.lengthscale);
    init[d + 1] = std::log(comp.variance);
    lo[d] = init[d] - 3.0;
    hi[d] = init[d] + 3.0;
    lo[d + 1] = init[d + 1] - 3.0;
    hi[d + 1] = init[d + 1] + 6.0;
  }

  const auto evaluate = [&](const Eigen::VectorXd& logp) {
    return log_marginal_likelihood(with_params(logp), noise_var, history);
  };
  const Eigen::VectorXd best =
      maximize_guarded(evaluate, init, lo, hi, budget, seed);
  return with_params(best);
}

BaseKernelSpec fit_base_hyperparams(const BaseKernelSpec& spec,
                                    double noise_var,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& y, int budget,
                                    std::uint64_t seed) {
  if (points.rows() < 2) {
    throw DomainError("fit_base_hyperparams: need at least two observations");
  }
  if (budget <= 0) return spec;

  const auto with_params = [&](const Eigen::VectorXd& logp) {
    BaseKernelSpec cand = spec;
    cand.lengthscale = std::exp(logp[0]);
    cand.variance = std::exp(logp[1]);
    return cand;
  };
  Eigen::VectorXd init(2), lo(2), hi(2);
  init << std::log(spec.lengthscale), std::log(spec.variance);
  lo << init[0] - 3.0, init[1] - 3.0;
  hi << init[0] + 3.0, init[1] + 6.0;
  const auto evaluate = [&](const Eigen::VectorXd& logp) {
    return base_log_marginal_likelihood(with_params(logp), noise_var, points,
                                        y);
  };
  const Eigen::VectorXd best =
      maximize_guarded(evaluate, init, lo, hi, budget, seed);
  return with_params(best);
}

}  // namespace csgp
