#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace slds {

// Linear dynamical system
//
//   z_t = A z_{t-1} + e_t,   e_t ~ N(0, Q)
//   y_t = C z_t   + v_t,     v_t ~ N(0, R)
//   z_1 ~ N(pi1, V1)
//
// with an l-dimensional hidden state and d-dimensional observations.
struct ModelParams {
  Eigen::MatrixXd A;    // l x l state transition
  Eigen::MatrixXd C;    // d x l emission
  Eigen::MatrixXd Q;    // l x l state noise covariance
  Eigen::MatrixXd R;    // d x d observation noise covariance
  Eigen::VectorXd pi1;  // initial state mean
  Eigen::MatrixXd V1;   // l x l initial state covariance

  Eigen::Index l() const { return A.rows(); }
  Eigen::Index d() const { return C.rows(); }
};

// One regularly sampled multivariate series; row t holds y_t.
struct ObservationSequence {
  Eigen::MatrixXd values;  // T x d
  std::string series_id;

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

struct StateSequence {
  Eigen::MatrixXd values;  // T x l
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks dimension consistency and that Q, R, V1 are symmetric PSD
// (minimum eigenvalue >= -1e-10, relative to the matrix scale).
// Violations are reported, not thrown.
ValidationReport validate_params(const ModelParams& params);

// validate_params, throwing InputError listing every violation.
void require_valid(const ModelParams& params);

// Draws (z_1..z_T, y_1..y_T) from the generative model. Deterministic given
// the seed: per time step the state noise is drawn first, then the
// observation noise, each as a vector of standard normals through the
// covariance factor.
std::pair<StateSequence, ObservationSequence> simulate(const ModelParams& params,
                                                       int T,
                                                       std::uint64_t seed);

// max |eigenvalue| of a square matrix.
double spectral_radius(const Eigen::MatrixXd& a);

// Solves S = A S A' + Q by fixed-point iteration (requires spectral_radius(A) < 1).
Eigen::MatrixXd stationary_state_covariance(const Eigen::MatrixXd& A,
                                            const Eigen::MatrixXd& Q);

// Random ground-truth generator: A gets the requested fraction of exact
// zeros and is rescaled to spectral radius 0.9; the initial distribution is
// the stationary one so simulated series are statistically uniform in time.
ModelParams random_sparse_model(int l, int d, double zero_fraction,
                                std::uint64_t seed);

}  // namespace slds
