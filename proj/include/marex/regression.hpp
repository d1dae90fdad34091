#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "marex/sim.hpp"

namespace marex {

// One regression sample. `y` is the one-step output increment measured over
// the transition starting at sample k; `phi` is the block regressor matrix
// (rows = parameters, cols = output channels) evaluated at sample k. Entries
// outside the per-channel blocks are identically zero.
struct RegressionRecord {
  long k = 0;
  Eigen::VectorXd y;
  Eigen::MatrixXd phi;
};

// Instrument matrix aligned with a RegressionRecord; always the same shape
// as the corresponding phi.
struct InstrumentRecord {
  long k = 0;
  Eigen::MatrixXd z;
};

// Crude parameter values used to simulate instruments.
struct NominalModel {
  Eigen::VectorXd theta_prime;

  // Linear-only crude model for the reference vessel (all second-order
  // coefficients zero).
  static NominalModel reference();
};

// Block regressor for one sample of the 3-DOF model:
//   surge block [y1, y1|y1|, y2*y3, tau1], sway block [y2, y1*y3, tau2],
//   yaw block [y3, y1*y2, tau3], arranged block-diagonally 10x3.
Eigen::MatrixXd ship_regressor(const Vec3& y, const Vec3& tau);

// Builds one record per consecutive output pair: record k regresses
// y(k+1) - y(k) on the blocks evaluated at sample k. Sequences must have
// equal length; N samples give N-1 records.
std::vector<RegressionRecord> build_regressors(const std::vector<Vec3>& y,
                                               const std::vector<Vec3>& tau);

// Simulates the nominal model over tau without disturbances, starting from
// the measured initial output, and assembles instrument matrices from the
// simulated states. Aligned with build_regressors (N-1 records). Throws
// InstrumentError if the nominal simulation diverges.
std::vector<InstrumentRecord> generate_instruments(const std::vector<Vec3>& tau,
                                                   const NominalModel& nominal,
                                                   const Vec3& initial_output,
                                                   double divergence_bound = 1e3);

// Subtracts the per-batch empirical mean from each batch of instruments.
// batch_sizes must partition the sequence exactly; batches must be nonempty.
std::vector<InstrumentRecord> demean_batchwise(const std::vector<InstrumentRecord>& z,
                                               const std::vector<std::size_t>& batch_sizes);

// Subtracts the grand mean of the whole sequence from every instrument.
// Batch boundaries are validated but do not affect the result.
std::vector<InstrumentRecord> demean_complete(const std::vector<InstrumentRecord>& z,
                                              const std::vector<std::size_t>& batch_sizes);

}  // namespace marex
