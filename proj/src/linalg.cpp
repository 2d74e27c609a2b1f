#include "csgp/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "csgp/errors.hpp"

namespace csgp {

namespace {

double diag_scale(const Eigen::MatrixXd& a) {
  const double mean_diag = a.diagonal().mean();
  return std::max(mean_diag, 1e-12);
}

}  // namespace

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a,
                                  double* jitter_used) {
  if (a.rows() != a.cols()) {
    throw DimensionError("jittered_cholesky: matrix must be square");
  }
  if (a.size() == 0 || a.norm() == 0.0) {
    if (jitter_used != nullptr) *jitter_used = 0.0;
    return Eigen::MatrixXd::Zero(a.rows(), a.cols());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    if (jitter_used != nullptr) *jitter_used = 0.0;
    return llt.matrixL();
  }
  const double scale = diag_scale(a);
  const Eigen::MatrixXd eye =
      Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (double rel = 1e-10; rel <= 1e-6 * 1.0001; rel *= 10.0) {
    const double jitter = rel * scale;
    llt.compute(a + jitter * eye);
    if (llt.info() == Eigen::Success) {
      if (jitter_used != nullptr) *jitter_used = jitter;
      return llt.matrixL();
    }
  }
  throw LinalgError("matrix not positive definite after jitter ladder");
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("psd_factor: matrix must be square");
  }
  if (a.size() == 0 || a.norm() == 0.0) {
    return Eigen::MatrixXd::Zero(a.rows(), a.cols());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  // Pivoted LDLT tolerates semidefinite input; clamp round-off negatives.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd d = ldlt.vectorD();
    const double floor = -1e-8 * diag_scale(a);
    bool acceptable = true;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] < floor) {
        acceptable = false;
        break;
      }
      d[i] = std::max(d[i], 0.0);
    }
    if (acceptable) {
      Eigen::MatrixXd l = ldlt.matrixL();
      l = ldlt.transpositionsP().transpose() *
          (l * d.cwiseSqrt().asDiagonal()).eval();
      return l;
    }
  }
  return jittered_cholesky(a);
}

Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& l,
                               const Eigen::MatrixXd& b) {
  Eigen::MatrixXd y = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

double cholesky_logdet(const Eigen::MatrixXd& l) {
  return 2.0 * l.diagonal().array().log().sum();
}

void IncrementalCholesky::reset(const Eigen::MatrixXd& a) {
  l_ = jittered_cholesky(a);
  n_ = a.rows();
}

void IncrementalCholesky::append(const Eigen::VectorXd& cross, double diag) {
  if (cross.size() != n_) {
    throw DimensionError("IncrementalCholesky::append: bad cross size");
  }
  l_.conservativeResize(n_ + 1, n_ + 1);
  if (n_ > 0) {
    const Eigen::VectorXd row = l_.topLeftCorner(n_, n_)
                                    .triangularView<Eigen::Lower>()
                                    .solve(cross);
    l_.row(n_).head(n_) = row.transpose();
    diag -= row.squaredNorm();
  }
  // A tiny floor guards against round-off on near-degenerate appends.
  l_(n_, n_) = std::sqrt(std::max(diag, 1e-12));
  l_.col(n_).head(n_).setZero();
  ++n_;
}

Eigen::VectorXd IncrementalCholesky::solve(const Eigen::VectorXd& b) const {
  return cholesky_solve(l_.topLeftCorner(n_, n_), b);
}

Eigen::MatrixXd IncrementalCholesky::solve_matrix(const Eigen::MatrixXd& b) const {
  return cholesky_solve(l_.topLeftCorner(n_, n_), b);
}

Eigen::VectorXd IncrementalCholesky::forward_solve(
    const Eigen::VectorXd& b) const {
  return l_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solve(b);
}

double IncrementalCholesky::logdet() const {
  return cholesky_logdet(l_.topLeftCorner(n_, n_));
}

}  // namespace csgp
