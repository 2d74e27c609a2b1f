#ifndef CSGP_PIECEWISE_HPP_
#define CSGP_PIECEWISE_HPP_

#include <vector>

#include <Eigen/Dense>

namespace csgp {

// Piecewise polynomial on [breaks.front(), breaks.back()], degree <= 3.
// Piece i covers [breaks[i], breaks[i+1]] with local coordinate
// u = x - breaks[i]; value = c0 + c1*u + c2*u^2 + c3*u^3.
struct PiecewisePoly {
  std::vector<double> breaks;
  Eigen::MatrixXd coeffs;  // (#pieces) x 4

  double eval(double x) const;

  // Exact antiderivative with F(breaks.front()) = 0. Degree must be <= 2.
  PiecewisePoly antiderivative() const;
};

// Builds the piecewise-linear interpolant of (breaks, values).
PiecewisePoly piecewise_linear(const std::vector<double>& breaks,
                               const Eigen::VectorXd& values);

}  // namespace csgp

#endif  // CSGP_PIECEWISE_HPP_
