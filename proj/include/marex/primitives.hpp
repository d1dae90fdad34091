#pragma once

#include <string>
#include <vector>

#include "marex/sim.hpp"

namespace marex {

// Target envelope for one state channel.
struct ChannelEnvelope {
  enum class Kind { Constant, Band, Ramp, AbsBand };
  Kind kind = Kind::Constant;
  double a = 0.0;  // Constant: value; Band/AbsBand: lower bound; Ramp: start
  double b = 0.0;  // Band/AbsBand: upper bound; Ramp: end

  static ChannelEnvelope constant(double value) { return {Kind::Constant, value, value}; }
  static ChannelEnvelope band(double lo, double hi) { return {Kind::Band, lo, hi}; }
  static ChannelEnvelope ramp(double from, double to) { return {Kind::Ramp, from, to}; }
  static ChannelEnvelope abs_band(double lo, double hi) { return {Kind::AbsBand, lo, hi}; }
};

// Definition of one candidate maneuver: target envelopes for (u, v, r), a
// duration and the oscillation period used for band channels. The period is
// also the natural breaking point for splitting the maneuver into segments.
struct PrimitiveSpec {
  int id = 0;
  std::string label;
  ChannelEnvelope u;
  ChannelEnvelope v;
  ChannelEnvelope r;
  int duration = 300;
  int period = 100;
};

struct ExperimentPrimitive {
  int id = 0;
  std::string label;
  std::vector<Vec3> input_signal;               // tau per sample
  int duration = 0;                             // samples
  std::vector<BodyVelocity> expected_trajectory;  // undisturbed states, one per sample
  Pose displacement;                            // net pose change of the full trajectory
  int natural_segment = 0;                      // segment length for scheduling/planning

  BodyVelocity initial_state() const { return expected_trajectory.front(); }
};

struct PrimitiveLibrary {
  std::vector<ExperimentPrimitive> primitives;

  int size() const { return static_cast<int>(primitives.size()); }
  const ExperimentPrimitive& by_id(int id) const;
};

struct SynthesisOptions {
  double dt = kDt;
  Vec3 tau_limit{2e4, 2e4, 5e3};   // actuator saturation, absolute values
  double envelope_tolerance = 0.15;  // fraction of each stated bound
  double transient_fraction = 0.20;  // leading fraction exempt from the check
  double dither_fraction = 0.02;   // low-amplitude wobble on held channels
  int dither_period = 160;         // samples
  double zero_tolerance = 0.02;    // absolute tolerance where a bound is zero
  int slew_samples = 10;           // band transition length
  double divergence_bound = 1e3;
};

// Synthesizes the input signal realizing the target envelope with simple
// reference tracking (per-channel model inversion under saturation), then
// freezes the signal and its undisturbed trajectory for open-loop replay.
// Throws SynthesisError naming the violated channel when the envelope cannot
// be met within the duration.
ExperimentPrimitive synthesize_primitive(const PrimitiveSpec& spec, const VesselParams& params,
                                         const SynthesisOptions& opt = {});

// Net pose change of an undisturbed trajectory replayed from the origin.
Pose displacement_summary(const std::vector<BodyVelocity>& trajectory, double dt);
Pose displacement_summary(const ExperimentPrimitive& primitive, double dt);

// The eleven reference maneuvers: decelerating and accelerating runs, six
// zig-zags (flat/steep at three speeds) and three inward spirals.
std::vector<PrimitiveSpec> reference_primitive_specs();

// Envelope definitions identified on the full-scale vessel (ids 12..20,
// sampled at 1 Hz). Shipped as definitions only; no reference signals.
std::vector<PrimitiveSpec> fullscale_primitive_specs();

PrimitiveLibrary build_reference_library(const VesselParams& params,
                                         const SynthesisOptions& opt = {});

}  // namespace marex
