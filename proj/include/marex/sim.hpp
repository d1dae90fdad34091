#pragma once

#include <vector>

#include "marex/types.hpp"

namespace marex {

// One realization of the per-step disturbances.
struct DisturbanceSample {
  double u_c = 0.0;  // ocean current, surge component
  double v_c = 0.0;  // ocean current, sway component
  Vec3 w = Vec3::Zero();
};

// One discrete-time update of the body velocities. Relative velocities
// u - u_c and v - v_c enter every hydrodynamic term; tau enters through the
// actuator gains. Throws SimulationError on non-finite input, naming the
// offending field.
BodyVelocity step_dynamics(const BodyVelocity& state, const Vec3& tau,
                           const VesselParams& params,
                           const DisturbanceSample& dist = {});

struct SimStep {
  BodyVelocity state;  // true state at sample k
  Vec3 y;              // measured output: state + e(k)
};

struct SimResult {
  std::vector<SimStep> steps;  // one entry per input sample
  BodyVelocity final_state;    // state after the last input was applied

  std::vector<Vec3> outputs() const;
  std::vector<Vec3> states() const;
};

struct SimOptions {
  double divergence_bound = 1e3;  // abort when any |state| exceeds this
};

// Simulates the vessel over the whole input sequence. steps[k] holds the
// state and measured output at sample k, before tau[k] is applied. All
// disturbances are drawn from a stream seeded by dist.seed, so identical
// arguments give bit-identical results. Throws SimulationError on divergence,
// reporting the step index.
SimResult simulate(const BodyVelocity& initial, const std::vector<Vec3>& tau,
                   const VesselParams& params, const DisturbanceConfig& dist,
                   const SimOptions& opt = {});

// Static azimuth-thruster model: surge/sway force and yaw moment from two
// thruster magnitudes and azimuth angles.
Vec3 thruster_forces(const ThrusterCommand& cmd, const ActuatorGeometry& geom);

// Planar pose update from body velocities over one sample interval.
Pose kinematics_step(const Pose& pose, const BodyVelocity& vel, double dt);

}  // namespace marex
