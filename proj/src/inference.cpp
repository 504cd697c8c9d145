#include "slds/inference.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "slds/errors.hpp"

namespace slds {

namespace {

void check_sequence(const ModelParams& p, const ObservationSequence& y) {
  if (y.length() < 1) throw InputError("observation sequence is empty");
  if (y.dim() != p.d()) {
    throw InputError("observation dimension " + std::to_string(y.dim()) +
                     " does not match model d=" + std::to_string(p.d()));
  }
}

}  // namespace

FilterResult kalman_filter(const ModelParams& p, const ObservationSequence& y,
                           double jitter) {
  check_sequence(p, y);
  const Eigen::Index l = p.l();
  const Eigen::Index d = p.d();
  const Eigen::Index T = y.length();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(l, l);
  constexpr double log2pi = 1.8378770664093454836;  // log(2*pi)

  FilterResult out;
  out.filtered_means.resize(T);
  out.filtered_covs.resize(T);
  out.predicted_means.resize(T);
  out.predicted_covs.resize(T);

  Eigen::VectorXd pred_mean = p.pi1;
  Eigen::MatrixXd pred_cov = symmetrized(p.V1);

  for (Eigen::Index t = 0; t < T; ++t) {
    out.predicted_means[t] = pred_mean;
    out.predicted_covs[t] = pred_cov;

    const Eigen::MatrixXd S = symmetrized(p.C * pred_cov * p.C.transpose() + p.R);
    const SpdSolver solver(S, jitter,
                           "innovation covariance at t=" + std::to_string(t + 1));
    const Eigen::VectorXd innov = y.values.row(t).transpose() - p.C * pred_mean;
    // K = P C' S^{-1}, computed as a solve against the Cholesky factor.
    const Eigen::MatrixXd K = solver.solve(p.C * pred_cov).transpose();

    out.filtered_means[t] = pred_mean + K * innov;
    const Eigen::MatrixXd IKC = I - K * p.C;
    out.filtered_covs[t] = symmetrized(IKC * pred_cov * IKC.transpose() +
                                       K * p.R * K.transpose());
    out.log_likelihood -=
        0.5 * (d * log2pi + solver.log_det() + innov.dot(solver.solve(innov)));

    if (t + 1 < T) {
      pred_mean = p.A * out.filtered_means[t];
      pred_cov = symmetrized(p.A * out.filtered_covs[t] * p.A.transpose() + p.Q);
    }
  }
  return out;
}

SmoothedStats rts_smooth(const ModelParams& p, const FilterResult& filt,
                         double jitter) {
  const Eigen::Index T = filt.length();
  if (T < 1) throw InputError("rts_smooth: empty filter result");

  std::vector<Eigen::VectorXd> mean(T);
  std::vector<Eigen::MatrixXd> cov(T);
  std::vector<Eigen::MatrixXd> gain(T > 1 ? T - 1 : 0);

  mean[T - 1] = filt.filtered_means[T - 1];
  cov[T - 1] = filt.filtered_covs[T - 1];

  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const SpdSolver solver(filt.predicted_covs[t + 1], jitter,
                           "predicted covariance at t=" + std::to_string(t + 2));
    // J_t = P_{t|t} A' P_{t+1|t}^{-1}
    const Eigen::MatrixXd J =
        solver.solve(p.A * filt.filtered_covs[t]).transpose();
    mean[t] = filt.filtered_means[t] +
              J * (mean[t + 1] - filt.predicted_means[t + 1]);
    cov[t] = symmetrized(filt.filtered_covs[t] +
                         J * (cov[t + 1] - filt.predicted_covs[t + 1]) * J.transpose());
    gain[t] = J;
  }

  SmoothedStats stats;
  stats.zhat = mean;
  stats.M.resize(T);
  stats.Mcross.resize(T > 1 ? T - 1 : 0);
  for (Eigen::Index t = 0; t < T; ++t) {
    stats.M[t] = symmetrized(cov[t] + mean[t] * mean[t].transpose());
  }
  for (Eigen::Index t = 1; t < T; ++t) {
    // Cov(z_t, z_{t-1} | y) = P_{t|T} J_{t-1}'
    stats.Mcross[t - 1] =
        cov[t] * gain[t - 1].transpose() + mean[t] * mean[t - 1].transpose();
  }
  return stats;
}

double log_likelihood(const ModelParams& p, const ObservationSequence& y,
                      double jitter) {
  return kalman_filter(p, y, jitter).log_likelihood;
}

namespace {

struct JointGaussian {
  Eigen::VectorXd mean_z;            // stacked T*l state mean
  Eigen::MatrixXd cov_zz;            // T*l x T*l
  Eigen::VectorXd mean_y;            // stacked T*d
  Eigen::MatrixXd cov_yy;            // T*d x T*d
  Eigen::MatrixXd cov_zy;            // T*l x T*d
};

// Explicit mean/covariance of the joint (z, y) from the generative
// equations; the quadratic cost is why callers guard T*l.
JointGaussian build_joint(const ModelParams& p, Eigen::Index T) {
  const Eigen::Index l = p.l();
  const Eigen::Index d = p.d();
  JointGaussian g;
  g.mean_z.resize(T * l);
  g.cov_zz.resize(T * l, T * l);

  g.mean_z.segment(0, l) = p.pi1;
  for (Eigen::Index t = 1; t < T; ++t) {
    g.mean_z.segment(t * l, l) = p.A * g.mean_z.segment((t - 1) * l, l);
  }

  g.cov_zz.block(0, 0, l, l) = symmetrized(p.V1);
  for (Eigen::Index t = 1; t < T; ++t) {
    g.cov_zz.block(t * l, t * l, l, l) = symmetrized(
        p.A * g.cov_zz.block((t - 1) * l, (t - 1) * l, l, l) * p.A.transpose() +
        p.Q);
    for (Eigen::Index s = 0; s < t; ++s) {
      g.cov_zz.block(t * l, s * l, l, l) =
          p.A * g.cov_zz.block((t - 1) * l, s * l, l, l);
      g.cov_zz.block(s * l, t * l, l, l) =
          g.cov_zz.block(t * l, s * l, l, l).transpose();
    }
  }

  Eigen::MatrixXd C_big = Eigen::MatrixXd::Zero(T * d, T * l);
  Eigen::MatrixXd R_big = Eigen::MatrixXd::Zero(T * d, T * d);
  for (Eigen::Index t = 0; t < T; ++t) {
    C_big.block(t * d, t * l, d, l) = p.C;
    R_big.block(t * d, t * d, d, d) = p.R;
  }
  g.mean_y = C_big * g.mean_z;
  g.cov_zy = g.cov_zz * C_big.transpose();
  g.cov_yy = symmetrized(C_big * g.cov_zy + R_big);
  return g;
}

}  // namespace

SmoothedStats brute_force_smoother_oracle(const ModelParams& p,
                                          const ObservationSequence& y) {
  check_sequence(p, y);
  const Eigen::Index T = y.length();
  const Eigen::Index l = p.l();
  if (T * l > 64) {
    throw InputError("brute_force_smoother_oracle: T*l > 64");
  }

  const JointGaussian g = build_joint(p, T);
  Eigen::VectorXd y_flat(T * p.d());
  for (Eigen::Index t = 0; t < T; ++t) {
    y_flat.segment(t * p.d(), p.d()) = y.values.row(t).transpose();
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(g.cov_yy);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("brute_force_smoother_oracle: observation covariance factorization failed");
  }
  const Eigen::VectorXd post_mean =
      g.mean_z + g.cov_zy * ldlt.solve(y_flat - g.mean_y);
  const Eigen::MatrixXd post_cov =
      g.cov_zz - g.cov_zy * ldlt.solve(g.cov_zy.transpose());

  SmoothedStats stats;
  stats.zhat.resize(T);
  stats.M.resize(T);
  stats.Mcross.resize(T > 1 ? T - 1 : 0);
  for (Eigen::Index t = 0; t < T; ++t) {
    stats.zhat[t] = post_mean.segment(t * l, l);
    stats.M[t] = symmetrized(post_cov.block(t * l, t * l, l, l) +
                             stats.zhat[t] * stats.zhat[t].transpose());
  }
  for (Eigen::Index t = 1; t < T; ++t) {
    stats.Mcross[t - 1] = post_cov.block(t * l, (t - 1) * l, l, l) +
                          stats.zhat[t] * stats.zhat[t - 1].transpose();
  }
  return stats;
}

double brute_force_log_likelihood_oracle(const ModelParams& p,
                                         const ObservationSequence& y) {
  check_sequence(p, y);
  const Eigen::Index T = y.length();
  if (T * p.l() > 64) {
    throw InputError("brute_force_log_likelihood_oracle: T*l > 64");
  }
  constexpr double log2pi = 1.8378770664093454836;

  const JointGaussian g = build_joint(p, T);
  Eigen::VectorXd y_flat(T * p.d());
  for (Eigen::Index t = 0; t < T; ++t) {
    y_flat.segment(t * p.d(), p.d()) = y.values.row(t).transpose();
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(g.cov_yy);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("brute_force_log_likelihood_oracle: factorization failed");
  }
  const Eigen::VectorXd r = y_flat - g.mean_y;
  const double log_det = ldlt.vectorD().array().log().sum();
  return -0.5 * (T * p.d() * log2pi + log_det + r.dot(ldlt.solve(r)));
}

}  // namespace slds
