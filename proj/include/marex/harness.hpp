#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marex/config.hpp"
#include "marex/estimator.hpp"
#include "marex/rng.hpp"

namespace marex {

std::vector<Vec3> make_validation_input(const ValidationSpec& spec, double dt);

// Initial experiments: every dictionary maneuver replayed once, regressors
// from the measured outputs and raw instruments from the nominal model.
struct InitialExperiments {
  PrimitiveLibrary library;
  std::vector<int> ids;                    // library id per dataset entry
  std::vector<PrimitiveDataset> datasets;  // aligned with ids
};

InitialExperiments collect_initial_experiments(const ScenarioConfig& cfg);

struct ValidationScenario {
  VesselParams params;
  double dt = kDt;
  BodyVelocity initial;
  std::vector<Vec3> input;
};

struct CvResult {
  double eps_u = 0.0;
  double eps_v = 0.0;
  double eps_r = 0.0;
  bool degenerate = false;
  long divergence_step = -1;

  double norm() const;
};

// Open-loop simulation error of the estimated model against the true system
// on held-out excitation. `distinct_from` optionally enforces that the
// validation input differs from every dictionary signal.
CvResult cv_validate(const Eigen::VectorXd& theta_hat, const ValidationScenario& scenario,
                     const PrimitiveLibrary* distinct_from = nullptr);

enum class DesignLabel { Optimized, Random, Uniform };

std::string to_string(DesignLabel label);

struct RunMetrics {
  int run = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;
  std::string reason;
  double param_err_norm = 0.0;  // norm of per-parameter normalized errors
  double eps_u = 0.0;
  double eps_v = 0.0;
  double eps_r = 0.0;
  double cv_norm = 0.0;
};

struct MonteCarloReport {
  std::string design;
  int runs = 0;
  double param_threshold = 0.0;
  double cv_threshold = 0.0;
  double fraction_param_below = 0.0;  // degenerate runs count as above
  double fraction_cv_below = 0.0;
  std::vector<RunMetrics> per_run;
};

// Builds the estimation input sequence of one design realization.
std::vector<Vec3> stitch_optimized_inputs(const PrimitiveLibrary& library,
                                          const Allocation& allocation,
                                          const std::vector<int>& ids, long total_n,
                                          BodyVelocity* initial = nullptr);
std::vector<Vec3> stitch_random_inputs(const PrimitiveLibrary& library, int segments,
                                       int segment_length, Rng& rng,
                                       BodyVelocity* initial = nullptr);

// Repeated estimation under fresh disturbance draws. Optimized and Uniform
// use a fixed allocation; Random redraws the maneuver sequence every run.
// Estimator failures mark the run degenerate instead of aborting.
MonteCarloReport run_monte_carlo(const ScenarioConfig& cfg, DesignLabel label,
                                 const PrimitiveLibrary& library,
                                 const Allocation* allocation, int runs_override = -1);

// One recorded sub-experiment of a segmented dataset.
struct SubExperiment {
  int batch_id = 0;
  int primitive_id = 0;
  std::vector<Vec3> y;
  std::vector<Vec3> tau;
};

// Simulated pool for the resampling protocol: `per_primitive` recordings of
// every dictionary maneuver, each `samples` long, fresh disturbances each.
std::vector<SubExperiment> simulate_subexperiment_pool(const ScenarioConfig& cfg,
                                                       const PrimitiveLibrary& library);

// Resampling study over any segmented dataset: per realization, draw the
// configured picks (or uniformly random batches), estimate, and
// cross-validate against the entire pool.
MonteCarloReport resample_study(const ScenarioConfig& cfg, const std::vector<SubExperiment>& pool,
                                bool random_design);

struct PipelineArtifacts {
  PrimitiveLibrary library;
  std::vector<int> candidate_ids;
  std::vector<InfoSummary> summaries;
  Allocation allocation;
  Schedule schedule;
  std::vector<MotionPrimitive> motion_set;
  Plan plan;
  std::vector<Vec3> stitched_tau;
  SimResult replay;
  ThetaEstimate estimate;
  CvResult cv;
};

// Full run: initial experiments, allocation, schedule, plan, disturbed
// replay of the planned experiment, estimation and cross-validation.
// Writes every intermediate artifact into out_dir when non-empty.
PipelineArtifacts run_pipeline(const ScenarioConfig& cfg, const std::string& out_dir = "");

}  // namespace marex
