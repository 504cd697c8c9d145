#pragma once

#include "slds/lds.hpp"
#include "slds/linalg.hpp"

namespace slds {

struct Forecast {
  std::vector<Eigen::VectorXd> horizon_values;  // yhat at steps psi+1..psi+h
  std::vector<Eigen::MatrixXd> horizon_covs;    // predictive covariances
};

// Filters the observed prefix, then propagates the filtered state h steps:
// mean z <- A z, cov P <- A P A' + Q, emitting yhat = C z with covariance
// C P C' + R at each step. Strictly causal: only the prefix conditions the
// prediction.
Forecast forecast(const ModelParams& params, const ObservationSequence& prefix,
                  int horizon, double jitter = kDefaultJitter);

}  // namespace slds
