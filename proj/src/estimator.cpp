#include "marex/estimator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "marex/errors.hpp"

namespace marex {

namespace {

constexpr double kRankTolerance = 1e-10;

struct BlockRange {
  const char* name;
  int begin;
  int size;
};

// Channel blocks of the normal matrix for the 3-DOF structure; a single
// all-covering block otherwise.
std::vector<BlockRange> blocks_for(int n_theta) {
  if (n_theta == kNumParams) {
    return {{"surge", 0, 4}, {"sway", 4, 3}, {"yaw", 7, 3}};
  }
  return {{"all", 0, n_theta}};
}

std::string worst_block_name(const Eigen::MatrixXd& a) {
  const auto blocks = blocks_for(static_cast<int>(a.rows()));
  std::string worst = blocks.front().name;
  double worst_cond = -1.0;
  for (const auto& blk : blocks) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.block(blk.begin, blk.begin, blk.size, blk.size));
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (cond > worst_cond) {
      worst_cond = cond;
      worst = blk.name;
    }
  }
  return worst;
}

ThetaEstimate solve_normal_equations(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                     long n_samples) {
  const int n = static_cast<int>(a.rows());

  // Column scaling; zero columns are left alone so they show up as rank loss.
  Eigen::VectorXd scale(n);
  for (int j = 0; j < n; ++j) {
    const double norm = a.col(j).norm();
    scale[j] = norm > 0.0 ? norm : 1.0;
  }
  const Eigen::MatrixXd a_scaled = a * scale.cwiseInverse().asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  const int rank = static_cast<int>(svd.rank());
  if (rank < n) {
    throw NonInformativeDataError(
        "normal matrix is rank deficient (rank " + std::to_string(rank) + " of " +
            std::to_string(n) + "); worst-conditioned block: " + worst_block_name(a),
        rank, worst_block_name(a));
  }

  ThetaEstimate est;
  est.theta_hat = scale.cwiseInverse().asDiagonal() * svd.solve(b);
  est.n_samples = n_samples;

  Eigen::JacobiSVD<Eigen::MatrixXd> raw_svd(a);
  const double smax = raw_svd.singularValues()(0);
  const double smin = raw_svd.singularValues()(raw_svd.singularValues().size() - 1);
  est.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  est.residual_norm = (b - a * est.theta_hat).squaredNorm();
  return est;
}

}  // namespace

ThetaEstimate iv_estimate(const std::vector<RegressionRecord>& dataset,
                          const std::vector<InstrumentRecord>& instruments) {
  if (dataset.size() != instruments.size()) {
    throw NonInformativeDataError("dataset and instruments differ in length: " +
                                      std::to_string(dataset.size()) + " vs " +
                                      std::to_string(instruments.size()),
                                  0, "all");
  }
  if (dataset.empty()) {
    throw NonInformativeDataError("empty dataset", 0, "all");
  }

  const auto n_theta = dataset.front().phi.rows();
  const auto n_x = dataset.front().phi.cols();
  const long n = static_cast<long>(dataset.size());
  if (n < n_theta) {
    throw NonInformativeDataError("only " + std::to_string(n) + " samples for " +
                                      std::to_string(n_theta) + " parameters",
                                  0, "all");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_theta, n_theta);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_theta);
  for (long k = 0; k < n; ++k) {
    const auto& z = instruments[k].z;
    const auto& rec = dataset[k];
    if (z.rows() != n_theta || z.cols() != n_x) {
      throw NonInformativeDataError("instrument shape mismatch at sample " + std::to_string(k),
                                    0, "all");
    }
    a.noalias() += z * rec.phi.transpose();
    b.noalias() += z * rec.y;
  }
  a /= static_cast<double>(n);
  b /= static_cast<double>(n);

  return solve_normal_equations(a, b, n);
}

ThetaEstimate ls_estimate(const std::vector<RegressionRecord>& dataset) {
  std::vector<InstrumentRecord> instruments;
  instruments.reserve(dataset.size());
  for (const auto& rec : dataset) {
    instruments.push_back(InstrumentRecord{rec.k, rec.phi});
  }
  return iv_estimate(dataset, instruments);
}

}  // namespace marex
