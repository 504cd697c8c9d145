#pragma once

#include <vector>

#include "slds/lds.hpp"
#include "slds/linalg.hpp"

namespace slds {

struct FilterResult {
  std::vector<Eigen::VectorXd> filtered_means;   // zhat_{t|t}
  std::vector<Eigen::MatrixXd> filtered_covs;    // P_{t|t}
  std::vector<Eigen::VectorXd> predicted_means;  // zhat_{t|t-1}; [0] is pi1
  std::vector<Eigen::MatrixXd> predicted_covs;   // P_{t|t-1};    [0] is V1
  double log_likelihood = 0.0;

  Eigen::Index length() const {
    return static_cast<Eigen::Index>(filtered_means.size());
  }
};

// Posterior sufficient statistics
//   zhat[t]   = E[z_t | y_1..y_T]
//   M[t]      = E[z_t z_t' | y_1..y_T]
//   Mcross[i] = E[z_t z_{t-1}' | y_1..y_T] for t = i+2 (1-based), so T-1 entries.
struct SmoothedStats {
  std::vector<Eigen::VectorXd> zhat;
  std::vector<Eigen::MatrixXd> M;
  std::vector<Eigen::MatrixXd> Mcross;
};

// Forward Kalman recursions with the Joseph-form covariance update; every
// stored covariance is symmetrized. log_likelihood accumulates the exact
// innovation log densities. A singular innovation covariance (after the
// jitter retry) throws NumericalError naming the time index.
FilterResult kalman_filter(const ModelParams& params, const ObservationSequence& y,
                           double jitter = kDefaultJitter);

// Backward Rauch-Tung-Striebel pass over a filter result produced from the
// same params and sequence. Second moments are assembled as
//   M_{t|T}     = Cov(z_t | y) + zhat_t zhat_t'
//   M_{t,t-1|T} = P_{t|T} J_{t-1}' + zhat_t zhat_{t-1}'
// where J is the smoother gain.
SmoothedStats rts_smooth(const ModelParams& params, const FilterResult& filt,
                         double jitter = kDefaultJitter);

double log_likelihood(const ModelParams& params, const ObservationSequence& y,
                      double jitter = kDefaultJitter);

// Test oracle: materializes the joint Gaussian over (z_1..z_T, y_1..y_T),
// conditions on y by a direct solve, and reads the posterior moments off the
// conditioned blocks. Independent of the filter/smoother recursions above.
// Guarded to T*l <= 64.
SmoothedStats brute_force_smoother_oracle(const ModelParams& params,
                                          const ObservationSequence& y);

// Same joint-Gaussian construction, returning log p(y_1..y_T). Shares no
// code path with kalman_filter's innovation accumulation.
double brute_force_log_likelihood_oracle(const ModelParams& params,
                                         const ObservationSequence& y);

}  // namespace slds
