#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "marex/regression.hpp"

namespace marex {

// Raw regressor/instrument sequences collected for one candidate maneuver.
struct PrimitiveDataset {
  int q = 0;
  std::vector<Eigen::MatrixXd> phi;
  std::vector<Eigen::MatrixXd> z;  // instruments before any mean subtraction
};

// Time-averaged moments of one candidate maneuver. gamma_bar corresponds to
// instruments demeaned per batch; x_bar, y_bar and z_bar are the raw moments
// needed to predict the effect of demeaning over the complete experiment.
struct InfoSummary {
  int q = 0;
  Eigen::MatrixXd gamma_bar;  // n_theta x n_theta
  Eigen::MatrixXd x_bar;      // n_theta x n_theta
  Eigen::MatrixXd y_bar;      // n_theta x n_x
  Eigen::MatrixXd z_bar;      // n_theta x n_x
  long n_samples_used = 0;
};

InfoSummary estimate_summary(const PrimitiveDataset& data, long min_samples = 50);
std::vector<InfoSummary> estimate_summaries(const std::vector<PrimitiveDataset>& data,
                                            long min_samples = 50);

enum class DesignMode { Basic, ZeroMean };

struct Allocation {
  Eigen::VectorXd fractions;  // on the simplex
  double total_n = 0.0;
  double objective_value = 0.0;  // log|det| of the predicted information matrix

  Eigen::VectorXd durations() const { return fractions * total_n; }
};

// Predicted information matrix of an allocation. Basic mode sums the
// per-maneuver information; ZeroMean mode additionally removes the rank-one
// contribution of the pooled instrument mean.
Eigen::MatrixXd info_matrix(const Allocation& allocation, const std::vector<InfoSummary>& summaries,
                            DesignMode mode);

struct LogDet {
  double value = 0.0;  // -inf when singular
  bool singular = false;
};

LogDet log_abs_det(const Eigen::MatrixXd& m);

// Objective and gradient in fraction space (the total duration contributes
// only a constant shift). Exposed for verification against finite
// differences.
double design_objective(const Eigen::VectorXd& rho, const std::vector<InfoSummary>& summaries,
                        DesignMode mode);
Eigen::VectorXd design_gradient(const Eigen::VectorXd& rho, const std::vector<InfoSummary>& summaries,
                                DesignMode mode);

struct OptimizeOptions {
  int starts = 16;            // multi-start count, the first start is `init`
  int max_iterations = 500;
  double step_tolerance = 1e-8;
  int random_probes = 200;    // simplex samples the result must dominate
  std::uint64_t seed = 12345;
};

// Maximizes log|det| of the predicted information matrix over the simplex by
// projected gradient ascent with backtracking, multi-start. The returned
// allocation dominates the initial point and all random probes. Throws
// DictionaryDeficiencyError when every evaluated point is singular.
Allocation optimize_allocation(const std::vector<InfoSummary>& summaries, double total_n,
                               DesignMode mode, const Eigen::VectorXd& init,
                               const OptimizeOptions& opt = {});

// Uniform fractions, the default initial guess.
Eigen::VectorXd uniform_fractions(int q);

struct ScheduleSegment {
  int q = 0;
  int repetitions = 0;
  int segment_length = 0;
};

struct Schedule {
  std::vector<ScheduleSegment> segments;
  long total_samples() const;
};

// Rounds continuous durations to whole segments: repetitions =
// round(N_q / N'_q), then the total is nudged back within one segment length
// of total_n by adjusting the entry with the largest rounding remainder.
// `ids` optionally labels each allocation entry with a primitive id; when
// empty the allocation index is used.
Schedule realize_schedule(const Allocation& allocation, const std::vector<int>& segment_lengths,
                          const std::vector<int>& ids = {});

}  // namespace marex
