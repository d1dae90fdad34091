#include "marex/regression.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "marex/errors.hpp"

namespace marex {

NominalModel NominalModel::reference() {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(kNumParams);
  t[0] = -0.08;    // surge damping
  t[3] = 1e-5;     // surge actuator gain
  t[4] = -0.08;    // sway damping
  t[6] = 1e-5;     // sway actuator gain
  t[7] = -0.4;     // yaw damping
  t[9] = 3.5e-4;   // yaw actuator gain
  return NominalModel{t};
}

Eigen::MatrixXd ship_regressor(const Vec3& y, const Vec3& tau) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(kNumParams, kNumOutputs);
  phi(0, 0) = y[0];
  phi(1, 0) = y[0] * std::abs(y[0]);
  phi(2, 0) = y[1] * y[2];
  phi(3, 0) = tau[0];
  phi(4, 1) = y[1];
  phi(5, 1) = y[0] * y[2];
  phi(6, 1) = tau[1];
  phi(7, 2) = y[2];
  phi(8, 2) = y[0] * y[1];
  phi(9, 2) = tau[2];
  return phi;
}

std::vector<RegressionRecord> build_regressors(const std::vector<Vec3>& y,
                                               const std::vector<Vec3>& tau) {
  if (y.size() != tau.size()) {
    throw RegressionError("output and input sequences differ in length: " +
                          std::to_string(y.size()) + " vs " + std::to_string(tau.size()));
  }
  if (y.empty()) {
    throw RegressionError("empty dataset");
  }

  std::vector<RegressionRecord> records;
  records.reserve(y.size() > 0 ? y.size() - 1 : 0);
  for (std::size_t k = 0; k + 1 < y.size(); ++k) {
    RegressionRecord rec;
    rec.k = static_cast<long>(k);
    rec.y = y[k + 1] - y[k];
    rec.phi = ship_regressor(y[k], tau[k]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<InstrumentRecord> generate_instruments(const std::vector<Vec3>& tau,
                                                   const NominalModel& nominal,
                                                   const Vec3& initial_output,
                                                   double divergence_bound) {
  const VesselParams crude = VesselParams::from_theta(nominal.theta_prime);
  SimOptions opt;
  opt.divergence_bound = divergence_bound;

  SimResult sim;
  try {
    sim = simulate(BodyVelocity::from(initial_output), tau, crude, DisturbanceConfig::none(), opt);
  } catch (const SimulationError& e) {
    throw InstrumentError(
        std::string("nominal model diverged while generating instruments (") + e.what() +
            "); the crude parameters are too imprecise",
        e.step());
  }

  std::vector<InstrumentRecord> records;
  records.reserve(tau.size() > 0 ? tau.size() - 1 : 0);
  for (std::size_t k = 0; k + 1 < tau.size(); ++k) {
    records.push_back(InstrumentRecord{static_cast<long>(k),
                                       ship_regressor(sim.steps[k].state.vec(), tau[k])});
  }
  return records;
}

namespace {

void check_batches(std::size_t total, const std::vector<std::size_t>& batch_sizes) {
  if (total == 0) {
    throw RegressionError("empty instrument sequence");
  }
  std::size_t sum = 0;
  for (std::size_t i = 0; i < batch_sizes.size(); ++i) {
    if (batch_sizes[i] == 0) {
      throw RegressionError("batch " + std::to_string(i) + " is empty");
    }
    sum += batch_sizes[i];
  }
  if (sum != total) {
    throw RegressionError("batch sizes sum to " + std::to_string(sum) + " but " +
                          std::to_string(total) + " instruments were given");
  }
}

}  // namespace

std::vector<InstrumentRecord> demean_batchwise(const std::vector<InstrumentRecord>& z,
                                               const std::vector<std::size_t>& batch_sizes) {
  check_batches(z.size(), batch_sizes);

  std::vector<InstrumentRecord> out = z;
  std::size_t offset = 0;
  for (std::size_t n : batch_sizes) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(z[offset].z.rows(), z[offset].z.cols());
    for (std::size_t k = 0; k < n; ++k) mean += z[offset + k].z;
    mean /= static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) out[offset + k].z -= mean;
    offset += n;
  }
  return out;
}

std::vector<InstrumentRecord> demean_complete(const std::vector<InstrumentRecord>& z,
                                              const std::vector<std::size_t>& batch_sizes) {
  check_batches(z.size(), batch_sizes);

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(z[0].z.rows(), z[0].z.cols());
  for (const auto& rec : z) mean += rec.z;
  mean /= static_cast<double>(z.size());

  std::vector<InstrumentRecord> out = z;
  for (auto& rec : out) rec.z -= mean;
  return out;
}

}  // namespace marex
