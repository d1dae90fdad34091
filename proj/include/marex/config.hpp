#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "marex/design.hpp"
#include "marex/planner.hpp"
#include "marex/primitives.hpp"

namespace marex {

// Held-out excitation used for cross-validation: chirp-like surge thrust with
// independent sway/yaw chirps, unlike any dictionary maneuver.
struct ValidationSpec {
  int duration = 300;
  BodyVelocity initial{0.3, 0.0, 0.0};
  double surge_level = 3000.0;
  double surge_amp = 1500.0;
  double sway_amp = 800.0;
  double yaw_amp = 400.0;
  double f0_hz = 0.02;
  double f1_hz = 0.2;
};

struct InitExperimentSpec {
  bool noise_free = false;   // run the initial experiments without disturbances
  std::uint64_t seed = 501;  // disturbance seed of the initial experiments
};

struct DesignSpec {
  DesignMode mode = DesignMode::ZeroMean;
  double total_n = 1000.0;
  long min_samples = 50;
  OptimizeOptions optimize;
  InitExperimentSpec init;
};

struct MonteCarloSpec {
  int runs = 500;
  std::uint64_t base_seed = 9000;
  int random_segments = 5;
  int random_segment_length = 200;
  double param_threshold = 5.0;
  double cv_threshold = 0.15;
  // Display caps for emitted plot data; raw metrics are never truncated.
  double plot_cap_param = 25.0;
  double plot_cap_cv_u = 1.0;
  double plot_cap_cv_v = 0.25;
  double plot_cap_cv_r = 0.15;
  double plot_cap_cv_norm = 0.5;
};

// Resampling protocol over a pool of recorded sub-experiments: draw a set of
// batches per design, estimate, and cross-validate against the whole pool.
struct ResampleSpec {
  int per_primitive = 5;
  int samples = 75;
  int resamples = 500;
  std::uint64_t seed = 4000;
  std::uint64_t pool_seed = 77;
  int random_picks = 6;
  std::map<int, int> picks;  // primitive id -> sub-experiments per realization
  double cv_threshold = 1.0;  // measured-output CV sits on the noise floor
};

struct PlannerSpec {
  LatticeConfig lattice;
  BasicMotionSpecs basics;
  std::string map_file;          // text grid or JSON, relative to the config
  OccupancyMap map = OccupancyMap::open(35, 44, 2.0);
  int start_cx = 3, start_cy = 40, start_h = 0;
  int goal_cx = 30, goal_cy = 5, goal_h = 3;
  std::string weights = "default";  // "default", "admissible", "zero"
  bool use_design_schedule = true;  // plan the optimized schedule
  std::vector<int> informative{1, 3, 6};  // manual mode: library ids
  int repetitions = 3;                    // manual mode: uses per primitive
};

// Inline input selection for the plain simulation command.
struct SimulateSpec {
  std::string kind = "primitive";  // "primitive", "validation", "inline"
  int primitive_id = 6;
  BodyVelocity initial{0.0, 0.0, 0.0};
  bool initial_given = false;
  std::vector<Vec3> inline_tau;
};

struct ScenarioConfig {
  double dt = kDt;
  VesselParams params = VesselParams::reference();
  Eigen::VectorXd nominal_theta;
  DisturbanceConfig disturbance;
  SynthesisOptions synthesis;
  int synth_duration = 300;
  int synth_period = 100;
  DesignSpec design;
  MonteCarloSpec mc;
  ResampleSpec resample;
  ValidationSpec validation;
  PlannerSpec planner;
  SimulateSpec simulate;

  static ScenarioConfig reference();
};

}  // namespace marex
