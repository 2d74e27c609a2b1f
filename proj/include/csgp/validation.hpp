#ifndef CSGP_VALIDATION_HPP_
#define CSGP_VALIDATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "csgp/posterior.hpp"
#include "csgp/spline_basis.hpp"

namespace csgp {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fixed-seed invariant suites behind the `validate` CLI subcommand.
std::vector<CheckResult> validate_splines();
std::vector<CheckResult> validate_posterior();
std::vector<CheckResult> validate_tmvn();
std::vector<CheckResult> validate_policies();
std::vector<CheckResult> validate_all();

// --- Reusable oracle-backed checks (shared with the acceptance suite) ---

// Counts coefficient vectors where grid concavity (g'' <= tol at every grid
// point) disagrees with nonpositivity of the first J-2 coefficients.
// Vectors mix signs per coordinate; magnitudes are bounded away from zero so
// a positive coefficient is detectable on the grid.
int concavity_equivalence_violations(const SplineBasisSpec& spec,
                                     int n_vectors, int grid_points,
                                     double tol, std::uint64_t seed);

// Max elementwise error of gp_posterior and beta_posterior against a
// brute-force joint-Gaussian conditioning oracle (dense inverse over the
// full joint covariance) on random instances of total dimension <= 10.
double posterior_oracle_max_error(int instances, std::uint64_t seed);

// Max |kernel-form - coefficient-form| of the unconstrained reward variance
// over random instances.
double variance_dual_form_max_error(int instances, std::uint64_t seed);

// Runs a short Warfarin bandit with CSGP-UCB and returns the per-round
// coefficient posteriors (the Lemma-1 pattern as produced by real rounds).
std::vector<CoefficientPosterior> harvest_round_posteriors(int rounds,
                                                           std::uint64_t seed);

}  // namespace csgp

#endif  // CSGP_VALIDATION_HPP_
