#pragma once

#include <Eigen/Dense>
#include <string>

namespace slds {

inline constexpr double kDefaultJitter = 1e-9;

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Cholesky solver for symmetric positive definite systems. If the first
// factorization fails, the diagonal is bumped once by jitter * (trace/n)
// (falling back to the bare jitter when the trace is not positive) and the
// factorization retried; a second failure throws NumericalError naming the
// offending matrix.
class SpdSolver {
 public:
  SpdSolver(Eigen::MatrixXd m, double jitter, const std::string& what);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd inverse() const;
  double log_det() const;
  Eigen::Index size() const { return llt_.matrixLLT().rows(); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Symmetrizes and clamps every eigenvalue below `floor` up to `floor`.
Eigen::MatrixXd psd_floor(const Eigen::MatrixXd& m, double floor);

// A factor F with F F' = cov. Cholesky when the matrix is positive definite;
// for PSD-but-singular covariances the eigendecomposition with negative
// eigenvalues clamped to zero (so Q = 0 and V1 = 0 are usable).
Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov);

// min / max eigenvalue of the symmetrized matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace slds
