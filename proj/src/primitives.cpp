#include "marex/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "marex/errors.hpp"

namespace marex {

const ExperimentPrimitive& PrimitiveLibrary::by_id(int id) const {
  for (const auto& p : primitives) {
    if (p.id == id) return p;
  }
  throw ConfigError("no primitive with id " + std::to_string(id));
}

namespace {

// Reference waveform for one channel. Band channels follow a trapezoid wave
// between the bounds; the sway band lags the yaw band by a quarter period so
// that the cross products v*r and u*v alternate sign instead of sitting at a
// constant level.
class ChannelReference {
 public:
  ChannelReference(const ChannelEnvelope& env, int duration, int period, int lag,
                   const SynthesisOptions& opt)
      : env_(env), duration_(duration), period_(period), lag_(lag), opt_(opt) {}

  double at(int k) const {
    switch (env_.kind) {
      case ChannelEnvelope::Kind::Constant: {
        return env_.a + dither(k, std::abs(env_.a));
      }
      case ChannelEnvelope::Kind::Ramp: {
        const double base = env_.a + (env_.b - env_.a) * static_cast<double>(k) / duration_;
        return base + dither(k, std::max(std::abs(env_.a), std::abs(env_.b)));
      }
      case ChannelEnvelope::Kind::Band:
      case ChannelEnvelope::Kind::AbsBand:
        return trapezoid(k);
    }
    return 0.0;
  }

 private:
  // Low-amplitude wobble that keeps the tracked input linearly independent
  // of the state regressors it would otherwise be an exact combination of.
  double dither(int k, double scale) const {
    const double amp = opt_.dither_fraction * scale;
    if (amp == 0.0) return 0.0;
    return amp * std::sin(2.0 * M_PI * k / opt_.dither_period);
  }

  double trapezoid(int k) const {
    const double center = 0.5 * (env_.a + env_.b);
    const double amp = 0.5 * (env_.b - env_.a);
    if (amp == 0.0) return center;
    // Quarter-phase start keeps the wave symmetric around k = 0, so a full
    // period sums to (almost) zero heading change.
    const int slew = std::max(1, opt_.slew_samples);
    const int phase = ((k - lag_) % period_ + period_ + period_ / 4) % period_;
    const int half = period_ / 2;
    const double target = phase < half ? 1.0 : -1.0;
    // Piecewise-linear transition at the start of each half period.
    const int into = phase < half ? phase : phase - half;
    double value = target;
    if (into < slew) {
      value = -target + 2.0 * target * (static_cast<double>(into) / slew);
    }
    return center + amp * value;
  }

  ChannelEnvelope env_;
  int duration_;
  int period_;
  int lag_;
  SynthesisOptions opt_;
};

struct ConformanceIssue {
  bool ok = true;
  std::string detail;
};

ConformanceIssue check_channel(const char* name, const ChannelEnvelope& env,
                               const std::vector<double>& values, int skip,
                               const SynthesisOptions& opt) {
  auto tol = [&](double bound) {
    const double t = opt.envelope_tolerance * std::abs(bound);
    return t > 0.0 ? t : opt.zero_tolerance;
  };

  double lo, hi;
  switch (env.kind) {
    case ChannelEnvelope::Kind::Constant:
      lo = env.a - tol(env.a);
      hi = env.a + tol(env.a);
      break;
    case ChannelEnvelope::Kind::Ramp:
      lo = std::min(env.a, env.b) - std::max(tol(env.a), tol(env.b));
      hi = std::max(env.a, env.b) + std::max(tol(env.a), tol(env.b));
      break;
    case ChannelEnvelope::Kind::Band:
    case ChannelEnvelope::Kind::AbsBand:
      lo = env.a - tol(env.a);
      hi = env.b + tol(env.b);
      break;
  }

  double vmin = values[skip];
  double vmax = values[skip];
  for (std::size_t k = skip; k < values.size(); ++k) {
    vmin = std::min(vmin, values[k]);
    vmax = std::max(vmax, values[k]);
  }
  if (vmin < lo || vmax > hi) {
    return {false, std::string(name) + " leaves the envelope: observed [" +
                       std::to_string(vmin) + ", " + std::to_string(vmax) +
                       "], allowed [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
  }

  if (env.kind == ChannelEnvelope::Kind::Band && env.a < env.b) {
    // Band channels must actually swing between the bounds.
    if (vmax < env.b - tol(env.b) || vmin > env.a + tol(env.a)) {
      return {false, std::string(name) + " does not reach its band bounds: observed [" +
                         std::to_string(vmin) + ", " + std::to_string(vmax) + "] for band [" +
                         std::to_string(env.a) + ", " + std::to_string(env.b) + "]"};
    }
  }

  if (env.kind == ChannelEnvelope::Kind::Ramp) {
    const double end_tol = std::max(tol(env.a), tol(env.b));
    if (std::abs(values.back() - env.b) > end_tol) {
      return {false, std::string(name) + " does not reach the ramp endpoint " +
                         std::to_string(env.b) + ": final value " + std::to_string(values.back())};
    }
  }

  return {true, {}};
}

}  // namespace

ExperimentPrimitive synthesize_primitive(const PrimitiveSpec& spec, const VesselParams& params,
                                         const SynthesisOptions& opt) {
  if (spec.duration < 1) {
    throw SynthesisError("duration must be at least one sample", "u");
  }

  const int lag = spec.period / 4;
  const ChannelReference ref_u(spec.u, spec.duration, spec.period, 0, opt);
  const ChannelReference ref_v(spec.v, spec.duration, spec.period, lag, opt);
  const ChannelReference ref_r(spec.r, spec.duration, spec.period, 0, opt);

  BodyVelocity state{ref_u.at(0), ref_v.at(0), ref_r.at(0)};
  std::vector<Vec3> inputs;
  inputs.reserve(spec.duration);

  for (int k = 0; k < spec.duration; ++k) {
    const double u = state.u;
    const double v = state.v;
    const double r = state.r;

    // One-step inversion per channel: each input enters its channel affinely
    // with a known gain, so the force realizing the next reference value is
    // explicit. Saturation is the only thing that can break tracking.
    Vec3 tau;
    tau[0] = (ref_u.at(k + 1) - u - params.x_u * u - params.x_uu * u * std::abs(u) -
              params.x_vr * v * r) /
             params.x_tau;
    tau[1] = (ref_v.at(k + 1) - v - params.y_v * v - params.y_ur * u * r) / params.y_tau;
    tau[2] = (ref_r.at(k + 1) - r - params.n_r * r - params.n_uv * u * v) / params.n_tau;
    for (int i = 0; i < 3; ++i) {
      tau[i] = std::clamp(tau[i], -opt.tau_limit[i], opt.tau_limit[i]);
    }

    inputs.push_back(tau);
    state = step_dynamics(state, tau, params);
  }

  // Freeze the canonical trajectory by replaying the signal open loop.
  SimOptions sim_opt;
  sim_opt.divergence_bound = opt.divergence_bound;
  const SimResult replay = simulate(BodyVelocity{ref_u.at(0), ref_v.at(0), ref_r.at(0)}, inputs,
                                    params, DisturbanceConfig::none(), sim_opt);

  std::vector<double> us, vs, rs;
  us.reserve(replay.steps.size());
  vs.reserve(replay.steps.size());
  rs.reserve(replay.steps.size());
  for (const auto& s : replay.steps) {
    us.push_back(s.state.u);
    vs.push_back(s.state.v);
    rs.push_back(s.state.r);
  }

  const int skip = std::min<int>(static_cast<int>(opt.transient_fraction * spec.duration),
                                 spec.duration - 1);
  auto enforce = [&](const char* name, const ChannelEnvelope& env, const std::vector<double>& values) {
    const ConformanceIssue issue = check_channel(name, env, values, skip, opt);
    if (!issue.ok) {
      throw SynthesisError("primitive " + std::to_string(spec.id) + " (" + spec.label + "): " +
                               issue.detail,
                           name);
    }
  };
  enforce("u", spec.u, us);
  enforce("v", spec.v, vs);
  enforce("r", spec.r, rs);

  ExperimentPrimitive prim;
  prim.id = spec.id;
  prim.label = spec.label;
  prim.input_signal = std::move(inputs);
  prim.duration = spec.duration;
  prim.expected_trajectory.reserve(replay.steps.size());
  for (const auto& s : replay.steps) prim.expected_trajectory.push_back(s.state);
  // Oscillating maneuvers break naturally at period boundaries. A monotone
  // yaw-rate sweep has no such points and stays in one piece.
  const bool yaw_sweep = spec.r.kind == ChannelEnvelope::Kind::Ramp && (spec.r.a != spec.r.b);
  prim.natural_segment = yaw_sweep ? spec.duration : spec.period;
  prim.displacement = displacement_summary(prim.expected_trajectory, opt.dt);
  return prim;
}

Pose displacement_summary(const std::vector<BodyVelocity>& trajectory, double dt) {
  Pose pose;
  for (const auto& vel : trajectory) {
    pose = kinematics_step(pose, vel, dt);
  }
  return pose;
}

Pose displacement_summary(const ExperimentPrimitive& primitive, double dt) {
  return displacement_summary(primitive.expected_trajectory, dt);
}

std::vector<PrimitiveSpec> reference_primitive_specs() {
  using E = ChannelEnvelope;
  std::vector<PrimitiveSpec> specs;
  auto add = [&](int id, std::string label, E u, E v, E r) {
    PrimitiveSpec s;
    s.id = id;
    s.label = std::move(label);
    s.u = u;
    s.v = v;
    s.r = r;
    specs.push_back(std::move(s));
  };

  add(1, "decelerating", E::ramp(1.0, 0.0), E::constant(0.0), E::constant(0.0));
  add(2, "accelerating", E::ramp(0.0, 1.0), E::constant(0.0), E::constant(0.0));
  add(3, "zigzag-slow-flat", E::constant(0.35), E::band(-0.1, 0.1), E::band(-0.2, 0.2));
  add(4, "zigzag-moderate-flat", E::constant(0.8), E::band(-0.1, 0.1), E::band(-0.2, 0.2));
  add(5, "zigzag-fast-flat", E::constant(1.15), E::band(-0.1, 0.1), E::band(-0.2, 0.2));
  add(6, "zigzag-slow-steep", E::constant(0.35), E::band(-0.15, 0.15), E::band(-0.35, 0.35));
  add(7, "zigzag-moderate-steep", E::constant(0.7), E::band(-0.15, 0.15), E::band(-0.35, 0.35));
  add(8, "zigzag-fast-steep", E::constant(1.0), E::band(-0.15, 0.15), E::band(-0.35, 0.35));
  add(9, "spiral-slow", E::constant(0.4), E::constant(0.05), E::ramp(0.0, -0.6));
  add(10, "spiral-moderate", E::constant(0.75), E::constant(0.125), E::ramp(0.0, -0.6));
  add(11, "spiral-fast", E::constant(1.0), E::constant(0.2), E::ramp(0.0, -0.6));
  return specs;
}

std::vector<PrimitiveSpec> fullscale_primitive_specs() {
  using E = ChannelEnvelope;
  std::vector<PrimitiveSpec> specs;
  auto add = [&](int id, std::string label, E u, E v, E r, int period) {
    PrimitiveSpec s;
    s.id = id;
    s.label = std::move(label);
    s.u = u;
    s.v = v;
    s.r = r;
    s.duration = 100;  // 100 s of maneuvering at 1 Hz
    s.period = period;
    specs.push_back(std::move(s));
  };

  add(12, "surge-accel-decel", E::band(0.0, 3.5), E::constant(0.0), E::constant(0.0), 100);
  add(13, "sway-accel-decel", E::constant(0.0), E::band(-1.0, 1.0), E::constant(0.0), 100);
  add(14, "sway-slow", E::constant(0.0), E::abs_band(0.5, 0.8), E::constant(0.0), 100);
  add(15, "sway-moderate", E::constant(0.0), E::abs_band(0.9, 0.9), E::constant(0.0), 100);
  add(16, "sway-fast", E::constant(0.0), E::abs_band(1.1, 1.2), E::constant(0.0), 100);
  add(17, "zigzag-slow-fast-period", E::constant(3.0), E::band(-0.5, 0.5), E::band(-0.03, 0.03), 30);
  add(18, "zigzag-fast-fast-period", E::constant(4.0), E::band(-0.5, 0.5), E::band(-0.03, 0.03), 30);
  add(19, "zigzag-slow-slow-period", E::constant(3.0), E::band(-0.5, 0.5), E::band(-0.03, 0.03), 100);
  add(20, "zigzag-fast-slow-period", E::constant(4.0), E::band(-0.5, 0.5), E::band(-0.03, 0.03), 100);
  return specs;
}

PrimitiveLibrary build_reference_library(const VesselParams& params, const SynthesisOptions& opt) {
  PrimitiveLibrary lib;
  for (const auto& spec : reference_primitive_specs()) {
    lib.primitives.push_back(synthesize_primitive(spec, params, opt));
  }
  return lib;
}

}  // namespace marex
