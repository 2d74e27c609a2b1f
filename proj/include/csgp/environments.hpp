#ifndef CSGP_ENVIRONMENTS_HPP_
#define CSGP_ENVIRONMENTS_HPP_

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "csgp/rng.hpp"

namespace csgp {

// A test-function environment: deterministic mean reward plus Gaussian
// observation noise, with a fine action grid for oracle regret.
struct Environment {
  int dim = 0;
  std::string name;
  std::function<Eigen::VectorXd(Rng&)> context_sampler;
  std::function<double(double, const Eigen::VectorXd&)> reward_fn;
  // Optional fast sup_a over optimum_grid; when absent, regret() scans the
  // grid through reward_fn.
  std::function<double(const Eigen::VectorXd&)> max_reward_fn;
  double noise_sd = 0.0;
  Eigen::VectorXd optimum_grid;
};

// Warfarin dosing test function on a in [0,1], x in [-1,1]^7. Quadratic and
// concave in the action for every fixed context.
double warfarin_eval(double a, const Eigen::VectorXd& x);

Environment make_warfarin_env(double noise_var, int optimum_grid_size = 1000);

// Synthetic family: f(a, x) = sum_s h_s(a) eta_s(x)^2 + gamma(x), where each
// h_s is a GP draw conditioned on h'' <= 0 on a fine grid (so f is concave
// in the action by construction) and eta_s, gamma are lazily-extended GP
// draws over the streaming contexts.
struct SyntheticSpec {
  int d = 5;
  double theta = 1.0;        // context kernel lengthscale
  int S = 10;                // number of concave components
  int fine_grid_size = 200;  // h'' <= 0 conditioning grid
  std::uint64_t seed = 0;
  double noise_var = 0.1;
  double action_lengthscale = 0.6;  // kernel of the h_s draws
  int optimum_grid_size = 1000;
};

Environment synthetic_generate(const SyntheticSpec& spec);

// Noisy reward draw from the round's RNG stream.
double observe(const Environment& env, double a, const Eigen::VectorXd& x,
               Rng& rng);

// Oracle regret on the noiseless reward: sup over the optimum grid (and the
// queried action itself) minus the achieved reward. Always >= 0.
double regret(const Environment& env, double a, const Eigen::VectorXd& x);

Eigen::VectorXd uniform_grid(int size);

}  // namespace csgp

#endif  // CSGP_ENVIRONMENTS_HPP_
