#ifndef CSGP_LINALG_HPP_
#define CSGP_LINALG_HPP_

#include <Eigen/Dense>

namespace csgp {

// Cholesky factor of a symmetric PD matrix, escalating diagonal jitter from
// 1e-10 to 1e-6 (relative to the mean diagonal) before giving up.
// Throws LinalgError if the matrix is not PD at the top of the ladder.
// If `jitter_used` is non-null, the jitter that succeeded is written there.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a,
                                  double* jitter_used = nullptr);

// Factor L with L*L^T ~= a for a symmetric PSD (possibly singular) matrix.
// Tries a plain Cholesky first, then a pivoted LDLT with negative eigenvalues
// clamped to zero, then the jitter ladder. Degenerate directions stay exactly
// degenerate under the LDLT route, which the truncated sampler relies on.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& a);

// Solve (L L^T) x = b given the lower-triangular factor L.
Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& l,
                               const Eigen::MatrixXd& b);

// 2 * sum(log(diag(L))), i.e. log det of the factored matrix.
double cholesky_logdet(const Eigen::MatrixXd& l);

// Maintains the Cholesky factor of a growing SPD matrix. Appending one
// row/column costs O(n^2); the resulting factor matches a fresh
// factorization of the extended matrix.
class IncrementalCholesky {
 public:
  IncrementalCholesky() = default;

  // (Re)factor from scratch.
  void reset(const Eigen::MatrixXd& a);

  // Append a row/column: `cross` holds the covariances against the existing
  // points and `diag` the new diagonal entry.
  void append(const Eigen::VectorXd& cross, double diag);

  Eigen::Index size() const { return n_; }
  const Eigen::MatrixXd& factor() const { return l_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& b) const;

  // Solve L y = b (forward substitution only).
  Eigen::VectorXd forward_solve(const Eigen::VectorXd& b) const;

  double logdet() const;

 private:
  Eigen::MatrixXd l_;  // lower triangular, top-left n_ x n_ block valid
  Eigen::Index n_ = 0;
};

}  // namespace csgp

#endif  // CSGP_LINALG_HPP_
