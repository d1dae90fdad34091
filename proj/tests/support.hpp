#pragma once

// Shared helpers for the test suites: deterministic excitation signals and
// the closed-form scalar example used to cross-check the estimator.

#include <cmath>
#include <cstdint>
#include <vector>

#include "marex/regression.hpp"
#include "marex/rng.hpp"
#include "marex/sim.hpp"

namespace marex::testing {

// Excitation reaching every regressor direction: surge thrust with a slow
// sweep plus independent sway/yaw chirps.
inline std::vector<Vec3> rich_input(int n, double dt = kDt) {
  std::vector<Vec3> tau;
  tau.reserve(n);
  const double total = n * dt;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double phase = 2.0 * M_PI * (0.02 * t + 0.5 * (0.2 - 0.02) * t * t / total);
    tau.emplace_back(3000.0 + 1500.0 * std::sin(phase), 800.0 * std::sin(0.7 * phase + 1.0),
                     400.0 * std::sin(1.3 * phase + 2.0));
  }
  return tau;
}

// Scalar worked example: y(k) = theta0 * u(k) + e(k) with an input whose
// offset changes sign halfway and whose zero-mean part repeats in both
// halves. The raw instrument is the known input itself.
struct Example1Data {
  double theta0 = 0.0;
  std::vector<double> u;
  std::vector<double> u_tilde;
  std::vector<RegressionRecord> records;
  std::vector<InstrumentRecord> instruments;  // raw, before demeaning
  std::vector<std::size_t> batches;           // the two halves
};

inline Example1Data make_example1(double theta0, double u_bar, double sigma_e, int n,
                                  std::uint64_t seed) {
  Example1Data data;
  data.theta0 = theta0;
  Rng rng(seed);
  const int half = n / 2;
  for (int k = 0; k < n; ++k) {
    const int phase = k % half;
    const double tilde = 0.3 * std::sin(2.0 * M_PI * phase / 25.0);
    const double u = tilde + (k < half ? u_bar : -u_bar);
    const double y = theta0 * u + rng.gaussian(0.0, sigma_e);

    data.u.push_back(u);
    data.u_tilde.push_back(tilde);

    RegressionRecord rec;
    rec.k = k;
    rec.y = Eigen::VectorXd::Constant(1, y);
    rec.phi = Eigen::MatrixXd::Constant(1, 1, u);
    data.records.push_back(std::move(rec));

    data.instruments.push_back(InstrumentRecord{k, Eigen::MatrixXd::Constant(1, 1, u)});
  }
  data.batches = {static_cast<std::size_t>(half), static_cast<std::size_t>(n - half)};
  return data;
}

// Closed-form instrumental-variable estimate of the scalar example for a
// given instrument sequence.
inline double example1_closed_form(const Example1Data& data, const std::vector<double>& zeta) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < data.records.size(); ++k) {
    num += zeta[k] * data.records[k].y[0];
    den += zeta[k] * data.records[k].phi(0, 0);
  }
  return num / den;
}

inline double variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / xs.size();
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace marex::testing
