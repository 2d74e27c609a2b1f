#include "csgp/piecewise.hpp"

#include <algorithm>
#include <cassert>

namespace csgp {

double PiecewisePoly::eval(double x) const {
  assert(!breaks.empty());
  // Locate the piece; x at the right endpoint uses the last piece.
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  Eigen::Index i = std::distance(breaks.begin(), it) - 1;
  i = std::clamp<Eigen::Index>(i, 0, coeffs.rows() - 1);
  const double u = x - breaks[static_cast<std::size_t>(i)];
  const auto c = coeffs.row(i);
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

PiecewisePoly PiecewisePoly::antiderivative() const {
  PiecewisePoly out;
  out.breaks = breaks;
  out.coeffs = Eigen::MatrixXd::Zero(coeffs.rows(), 4);
  double running = 0.0;
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
    const auto c = coeffs.row(i);
    assert(c[3] == 0.0 && "antiderivative supports degree <= 2 input");
    out.coeffs(i, 0) = running;
    out.coeffs(i, 1) = c[0];
    out.coeffs(i, 2) = c[1] / 2.0;
    out.coeffs(i, 3) = c[2] / 3.0;
    const double w = breaks[static_cast<std::size_t>(i) + 1] -
                     breaks[static_cast<std::size_t>(i)];
    running += w * (c[0] + w * (c[1] / 2.0 + w * c[2] / 3.0));
  }
  return out;
}

PiecewisePoly piecewise_linear(const std::vector<double>& breaks,
                               const Eigen::VectorXd& values) {
  assert(values.size() == static_cast<Eigen::Index>(breaks.size()));
  PiecewisePoly out;
  out.breaks = breaks;
  const Eigen::Index pieces = values.size() - 1;
  out.coeffs = Eigen::MatrixXd::Zero(pieces, 4);
  for (Eigen::Index i = 0; i < pieces; ++i) {
    const double w = breaks[static_cast<std::size_t>(i) + 1] -
                     breaks[static_cast<std::size_t>(i)];
    out.coeffs(i, 0) = values[i];
    out.coeffs(i, 1) = (values[i + 1] - values[i]) / w;
  }
  return out;
}

}  // namespace csgp
