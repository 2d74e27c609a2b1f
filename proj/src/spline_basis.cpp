#include "csgp/spline_basis.hpp"

#include <cmath>

#include "csgp/errors.hpp"

namespace csgp {

namespace {

void check_action(double a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("action outside [0, 1]");
  }
}

// Order-1 M-spline: 1/(t_{j+1} - t_j) on [t_j, t_{j+1}), zero elsewhere.
// The right boundary of the domain is treated as closed.
double mspline_order1(const Eigen::VectorXd& t, Eigen::Index j, double x) {
  const double lo = t[j];
  const double hi = t[j + 1];
  if (hi <= lo) return 0.0;
  const bool inside = (x >= lo && x < hi) || (x == hi && hi == t[t.size() - 1]);
  return inside ? 1.0 / (hi - lo) : 0.0;
}

// Curry-Schoenberg recursion, needed here only up to order 2.
double mspline_rec(const Eigen::VectorXd& t, Eigen::Index j, int k, double x) {
  if (k == 1) return mspline_order1(t, j, x);
  const double span = t[j + k] - t[j];
  if (span <= 0.0) return 0.0;
  const double left = (x - t[j]) * mspline_rec(t, j, k - 1, x);
  const double right = (t[j + k] - x) * mspline_rec(t, j + 1, k - 1, x);
  return k * (left + right) / ((k - 1) * span);
}

}  // namespace

SplineBasisSpec build_basis(int num_interior_knots, int order_k) {
  if (order_k != 1 && order_k != 2) {
    throw DomainError(
        "order_k must be 1 or 2; higher orders break the equivalence between "
        "coefficient nonpositivity and concavity");
  }
  if (num_interior_knots < 1) {
    throw DomainError("need at least one interior knot");
  }
  SplineBasisSpec spec;
  spec.order_k = order_k;
  spec.num_mspline = num_interior_knots + order_k;
  spec.J = spec.num_mspline + 2;

  const int total = num_interior_knots + 2 * order_k;
  spec.knots.resize(total);
  int pos = 0;
  for (int i = 0; i < order_k; ++i) spec.knots[pos++] = 0.0;
  for (int i = 1; i <= num_interior_knots; ++i) {
    spec.knots[pos++] = static_cast<double>(i) / (num_interior_knots + 1);
  }
  for (int i = 0; i < order_k; ++i) spec.knots[pos++] = 1.0;

  // Breakpoints: the distinct knot sites.
  std::vector<double> sites;
  sites.push_back(0.0);
  for (int i = 1; i <= num_interior_knots; ++i) {
    sites.push_back(static_cast<double>(i) / (num_interior_knots + 1));
  }
  sites.push_back(1.0);

  // Each M_j is polynomial of degree order_k - 1 <= 1 on every piece, so two
  // interior samples per piece recover the local coefficients exactly.
  spec.msplines.reserve(spec.num_mspline);
  spec.csplines.reserve(spec.num_mspline);
  const Eigen::Index pieces = static_cast<Eigen::Index>(sites.size()) - 1;
  for (int j = 0; j < spec.num_mspline; ++j) {
    PiecewisePoly m;
    m.breaks = sites;
    m.coeffs = Eigen::MatrixXd::Zero(pieces, 4);
    for (Eigen::Index i = 0; i < pieces; ++i) {
      const double s = sites[static_cast<std::size_t>(i)];
      const double w = sites[static_cast<std::size_t>(i) + 1] - s;
      const double x1 = s + 0.25 * w;
      const double x2 = s + 0.75 * w;
      const double v1 = mspline_rec(spec.knots, j, order_k, x1);
      const double v2 = mspline_rec(spec.knots, j, order_k, x2);
      const double slope = (v2 - v1) / (0.5 * w);
      m.coeffs(i, 0) = v1 - slope * 0.25 * w;
      m.coeffs(i, 1) = slope;
    }
    spec.csplines.push_back(m.antiderivative().antiderivative());
    spec.msplines.push_back(std::move(m));
  }
  return spec;
}

Eigen::VectorXd mspline_eval(const SplineBasisSpec& spec, double a) {
  check_action(a);
  Eigen::VectorXd out(spec.num_mspline);
  for (int j = 0; j < spec.num_mspline; ++j) {
    out[j] = mspline_rec(spec.knots, j, spec.order_k, a);
  }
  return out;
}

Eigen::VectorXd cspline_eval(const SplineBasisSpec& spec, double a) {
  check_action(a);
  Eigen::VectorXd out(spec.num_mspline);
  for (int j = 0; j < spec.num_mspline; ++j) {
    out[j] = spec.csplines[static_cast<std::size_t>(j)].eval(a);
  }
  return out;
}

Eigen::VectorXd phi(const SplineBasisSpec& spec, double a) {
  check_action(a);
  Eigen::VectorXd out(spec.J);
  out.head(spec.num_mspline) = cspline_eval(spec, a);
  out[spec.J - 2] = a;
  out[spec.J - 1] = 1.0;
  return out;
}

double second_derivative(const SplineBasisSpec& spec,
                         const Eigen::VectorXd& coeffs, double a) {
  check_action(a);
  if (coeffs.size() != spec.J) {
    throw DimensionError("second_derivative: coefficient length must be J");
  }
  const Eigen::VectorXd m = mspline_eval(spec, a);
  return m.dot(coeffs.head(spec.num_mspline));
}

}  // namespace csgp
