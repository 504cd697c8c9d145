#include "slds/lds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "slds/errors.hpp"
#include "slds/linalg.hpp"
#include "slds/rng.hpp"

namespace slds {

namespace {

void check_psd(const Eigen::MatrixXd& m, const std::string& name,
               ValidationReport& report) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    report.ok = false;
    report.violations.push_back(name + " not symmetric");
    return;
  }
  if (min_eigenvalue(m) < -1e-10 * scale) {
    report.ok = false;
    report.violations.push_back(name + " not PSD");
  }
}

Eigen::VectorXd draw_normals(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

ValidationReport validate_params(const ModelParams& p) {
  ValidationReport report;
  const Eigen::Index l = p.A.rows();
  const Eigen::Index d = p.C.rows();
  if (l < 1) {
    report.ok = false;
    report.violations.push_back("hidden dimension l must be positive");
  }
  if (d < 1) {
    report.ok = false;
    report.violations.push_back("observation dimension d must be positive");
  }
  if (p.A.cols() != l) {
    report.ok = false;
    report.violations.push_back("A not square");
  }
  if (p.C.cols() != l) {
    report.ok = false;
    report.violations.push_back("C column count != l");
  }
  if (p.Q.rows() != l || p.Q.cols() != l) {
    report.ok = false;
    report.violations.push_back("Q shape != l x l");
  }
  if (p.R.rows() != d || p.R.cols() != d) {
    report.ok = false;
    report.violations.push_back("R shape != d x d");
  }
  if (p.pi1.size() != l) {
    report.ok = false;
    report.violations.push_back("pi1 length != l");
  }
  if (p.V1.rows() != l || p.V1.cols() != l) {
    report.ok = false;
    report.violations.push_back("V1 shape != l x l");
  }
  if (!report.ok) return report;  // PSD checks need consistent shapes

  check_psd(p.Q, "Q", report);
  check_psd(p.R, "R", report);
  check_psd(p.V1, "V1", report);
  return report;
}

void require_valid(const ModelParams& p) {
  const ValidationReport report = validate_params(p);
  if (report.ok) return;
  std::string msg = "invalid model parameters:";
  for (const auto& v : report.violations) msg += " " + v + ";";
  throw InputError(msg);
}

std::pair<StateSequence, ObservationSequence> simulate(const ModelParams& p,
                                                       int T,
                                                       std::uint64_t seed) {
  require_valid(p);
  if (T < 1) throw InputError("simulate: T must be >= 1");

  const Eigen::Index l = p.l();
  const Eigen::Index d = p.d();
  const Eigen::MatrixXd F_v1 = covariance_sqrt(p.V1);
  const Eigen::MatrixXd F_q = covariance_sqrt(p.Q);
  const Eigen::MatrixXd F_r = covariance_sqrt(p.R);

  Rng rng(seed);
  StateSequence z;
  ObservationSequence y;
  z.values.resize(T, l);
  y.values.resize(T, d);

  Eigen::VectorXd state = p.pi1 + F_v1 * draw_normals(rng, F_v1.cols());
  for (int t = 0; t < T; ++t) {
    if (t > 0) state = p.A * state + F_q * draw_normals(rng, F_q.cols());
    z.values.row(t) = state.transpose();
    y.values.row(t) = (p.C * state + F_r * draw_normals(rng, F_r.cols())).transpose();
  }
  return {std::move(z), std::move(y)};
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("spectral_radius: matrix not square");
  if (a.size() == 0) throw InputError("spectral_radius: empty matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, /*computeEigenvectors=*/false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd stationary_state_covariance(const Eigen::MatrixXd& A,
                                            const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd S = Q;
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::MatrixXd next = A * S * A.transpose() + Q;
    const double change = (next - S).cwiseAbs().maxCoeff();
    S = symmetrized(next);
    if (change <= 1e-14 * std::max(1.0, S.cwiseAbs().maxCoeff())) return S;
  }
  throw NumericalError("stationary_state_covariance: fixed point did not converge (is A stable?)");
}

ModelParams random_sparse_model(int l, int d, double zero_fraction,
                                std::uint64_t seed) {
  if (l < 1 || d < 1) throw InputError("random_sparse_model: dimensions must be positive");
  if (zero_fraction < 0.0 || zero_fraction > 1.0) {
    throw InputError("random_sparse_model: zero_fraction must lie in [0, 1]");
  }

  const int n_zero = static_cast<int>(std::lround(zero_fraction * l * l));
  Eigen::MatrixXd A(l, l);
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    for (int i = 0; i < l * l; ++i) A(i / l, i % l) = rng.normal();
    // Fisher-Yates over entry indices; the first n_zero become exact zeros.
    std::vector<int> idx(l * l);
    for (int i = 0; i < l * l; ++i) idx[i] = i;
    for (int i = l * l - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.uniform_below(i + 1)]);
    }
    for (int k = 0; k < n_zero; ++k) A(idx[k] / l, idx[k] % l) = 0.0;

    const double rho = spectral_radius(A);
    if (rho > 1e-3) {
      A *= 0.9 / rho;
      break;
    }
    if (n_zero == l * l) break;  // all-zero transition requested
  }

  Rng rng(mix_seed(seed, 0x5eed));
  Eigen::MatrixXd C(d, l);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < l; ++j) C(i, j) = rng.normal() / std::sqrt(double(l));

  ModelParams p;
  p.A = A;
  p.C = C;
  p.Q = 0.1 * Eigen::MatrixXd::Identity(l, l);
  p.R = 0.1 * Eigen::MatrixXd::Identity(d, d);
  p.pi1 = Eigen::VectorXd::Zero(l);
  p.V1 = stationary_state_covariance(p.A, p.Q);
  return p;
}

}  // namespace slds
