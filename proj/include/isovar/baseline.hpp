#pragma once

#include <span>
#include <vector>

#include "isovar/observe.hpp"

namespace isovar::baseline {

struct MlEstimate {
  std::vector<double> times;
  std::vector<double> sigma2_hat;
};

/// Unit-weight least-squares isotonic (nondecreasing) fit by pool adjacent
/// violators.
std::vector<double> pava(std::span<const double> y);

/// Order-restricted maximum likelihood estimate of the variances: PAVA on
/// r_i^2, then clamped below at gamma^2 (the residual series' noise
/// variance).
MlEstimate isotonic_mle(const observation::ResidualSeries& resid);

}  // namespace isovar::baseline
