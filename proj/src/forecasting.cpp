#include "slds/forecasting.hpp"

#include "slds/errors.hpp"
#include "slds/inference.hpp"

namespace slds {

Forecast forecast(const ModelParams& p, const ObservationSequence& prefix,
                  int horizon, double jitter) {
  if (horizon < 1) throw InputError("forecast: horizon must be >= 1");
  if (prefix.length() < 1) throw InputError("forecast: prefix is empty");

  const FilterResult filt = kalman_filter(p, prefix, jitter);
  Eigen::VectorXd z = filt.filtered_means.back();
  Eigen::MatrixXd P = filt.filtered_covs.back();

  Forecast out;
  out.horizon_values.reserve(horizon);
  out.horizon_covs.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    z = p.A * z;
    P = symmetrized(p.A * P * p.A.transpose() + p.Q);
    out.horizon_values.push_back(p.C * z);
    out.horizon_covs.push_back(symmetrized(p.C * P * p.C.transpose() + p.R));
  }
  return out;
}

}  // namespace slds
