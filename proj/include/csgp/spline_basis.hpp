#ifndef CSGP_SPLINE_BASIS_HPP_
#define CSGP_SPLINE_BASIS_HPP_

#include <vector>

#include <Eigen/Dense>

#include "csgp/piecewise.hpp"

namespace csgp {

// M-spline / C-spline basis on [0, 1].
//
// The M-spline layer has order_k in {1, 2} so that nonpositivity of the
// leading coefficients is equivalent to concavity of the modeled function.
// Twice-integrating the order-2 (piecewise linear) M-splines yields
// piecewise cubic C-splines.
//
// Knot layout: `num_interior` uniform knots strictly inside (0, 1) plus the
// boundary knots 0 and 1 repeated to multiplicity order_k. This produces
// num_interior + order_k basis functions, each nonnegative with unit
// integral over [0, 1].
struct SplineBasisSpec {
  Eigen::VectorXd knots;  // extended knot vector, nondecreasing, in [0, 1]
  int order_k = 2;
  int num_mspline = 0;  // num_interior + order_k
  int J = 0;            // num_mspline + 2 (C-splines plus linear plus constant)

  // Closed-form piecewise polynomials per basis function, built once.
  std::vector<PiecewisePoly> msplines;  // degree <= order_k - 1
  std::vector<PiecewisePoly> csplines;  // degree <= order_k + 1
};

SplineBasisSpec build_basis(int num_interior_knots, int order_k);

// All M-spline basis values at a; length num_mspline, entries >= 0.
Eigen::VectorXd mspline_eval(const SplineBasisSpec& spec, double a);

// All C-spline values C_j(a) = int_0^a int_0^u M_j(s) ds du; closed form.
Eigen::VectorXd cspline_eval(const SplineBasisSpec& spec, double a);

// Feature map (C_1(a), ..., C_{J-2}(a), a, 1); length J.
Eigen::VectorXd phi(const SplineBasisSpec& spec, double a);

// Second derivative of g(a) = phi(a)^T coeffs: sum_j M_j(a) coeffs_j over
// the first J-2 coefficients (linear and constant features have none).
double second_derivative(const SplineBasisSpec& spec,
                         const Eigen::VectorXd& coeffs, double a);

}  // namespace csgp

#endif  // CSGP_SPLINE_BASIS_HPP_
