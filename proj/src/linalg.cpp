#include "slds/linalg.hpp"

#include "slds/errors.hpp"

namespace slds {

SpdSolver::SpdSolver(Eigen::MatrixXd m, double jitter, const std::string& what) {
  llt_.compute(m);
  if (llt_.info() != Eigen::Success) {
    double scale = m.trace() / static_cast<double>(m.rows());
    if (!(scale > 0.0)) scale = 1.0;
    m.diagonal().array() += jitter * scale;
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) {
      throw NumericalError(what + " is not positive definite (after jitter retry)");
    }
  }
}

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& rhs) const {
  return llt_.solve(rhs);
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
  return llt_.solve(rhs);
}

Eigen::MatrixXd SpdSolver::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
}

double SpdSolver::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd psd_floor(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(m));
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(floor);
  return symmetrized(eig.eigenvectors() * vals.asDiagonal() *
                     eig.eigenvectors().transpose());
}

Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(cov));
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(m));
  return eig.eigenvalues().minCoeff();
}

}  // namespace slds
