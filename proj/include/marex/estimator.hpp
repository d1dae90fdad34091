#pragma once

#include <Eigen/Dense>
#include <vector>

#include "marex/regression.hpp"

namespace marex {

struct ThetaEstimate {
  Eigen::VectorXd theta_hat;
  double condition_number = 0.0;  // of the instrument-regressor normal matrix
  double residual_norm = 0.0;     // value of the squared IV criterion at theta_hat
  long n_samples = 0;
};

// Instrumental-variable estimate: solves A theta = b with
//   A = (1/N) sum Z(k) phi(k)^T,  b = (1/N) sum Z(k) y(k),
// in the least-squares sense when A is ill conditioned. Columns of A are
// rescaled by their norms before solving to even out the very different
// magnitudes of damping and actuator coefficients. Throws
// NonInformativeDataError when A is rank deficient (relative tolerance
// 1e-10), carrying the numerical rank and the worst-conditioned block.
ThetaEstimate iv_estimate(const std::vector<RegressionRecord>& dataset,
                          const std::vector<InstrumentRecord>& instruments);

// Least-squares special case: instruments equal to the regressors.
ThetaEstimate ls_estimate(const std::vector<RegressionRecord>& dataset);

}  // namespace marex
