#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "marex/errors.hpp"
#include "marex/primitives.hpp"
#include "support.hpp"

using namespace marex;

namespace {

const VesselParams kParams = VesselParams::reference();

const PrimitiveLibrary& library() {
  static const PrimitiveLibrary lib = build_reference_library(kParams);
  return lib;
}

double channel_min(const std::vector<BodyVelocity>& traj, int ch, int skip) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = skip; k < traj.size(); ++k) m = std::min(m, traj[k].vec()[ch]);
  return m;
}

double channel_max(const std::vector<BodyVelocity>& traj, int ch, int skip) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = skip; k < traj.size(); ++k) m = std::max(m, traj[k].vec()[ch]);
  return m;
}

}  // namespace

TEST_CASE("all eleven reference maneuvers synthesize") {
  const auto& lib = library();
  REQUIRE(lib.size() == 11);
  for (int id = 1; id <= 11; ++id) {
    const auto& p = lib.by_id(id);
    CHECK(p.id == id);
    CHECK(p.duration == 300);
    CHECK(p.input_signal.size() == 300);
    CHECK(p.expected_trajectory.size() == 300);
    CHECK(p.natural_segment == (id >= 9 ? 300 : 100));  // spirals stay in one piece
  }
}

TEST_CASE("replaying a stored signal reproduces the trajectory bit-exactly") {
  for (const auto& p : library().primitives) {
    const auto replay =
        simulate(p.initial_state(), p.input_signal, kParams, DisturbanceConfig::none());
    REQUIRE(replay.steps.size() == p.expected_trajectory.size());
    for (std::size_t k = 0; k < replay.steps.size(); ++k) {
      CHECK(replay.steps[k].state.u == p.expected_trajectory[k].u);
      CHECK(replay.steps[k].state.v == p.expected_trajectory[k].v);
      CHECK(replay.steps[k].state.r == p.expected_trajectory[k].r);
    }
  }
}

TEST_CASE("acceleration run ramps surge from rest to speed with quiet sway and yaw") {
  const auto& p = library().by_id(2);
  const auto& traj = p.expected_trajectory;
  CHECK(traj.front().u == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(traj.back().u == doctest::Approx(1.0).epsilon(0.02));
  for (const auto& s : traj) {
    CHECK(std::abs(s.v) < 0.02);
    CHECK(std::abs(s.r) < 0.02);
    CHECK(std::abs(s.u - 0.5) <= 0.5 + 1e-6);  // stays in [0, 1]
  }
  // The companion input keeps the other channels silent.
  for (const auto& t : p.input_signal) {
    CHECK(t[1] == 0.0);
    CHECK(t[2] == 0.0);
  }
}

TEST_CASE("zero envelope synthesizes the all-zero signal") {
  PrimitiveSpec spec;
  spec.id = 99;
  spec.label = "rest";
  spec.u = ChannelEnvelope::constant(0.0);
  spec.v = ChannelEnvelope::constant(0.0);
  spec.r = ChannelEnvelope::constant(0.0);
  spec.duration = 50;
  const auto prim = synthesize_primitive(spec, kParams);
  for (const auto& t : prim.input_signal) CHECK(t == Vec3::Zero());
  for (const auto& s : prim.expected_trajectory) CHECK(s.vec() == Vec3::Zero());
}

TEST_CASE("steep zig-zag stays within and reaches its envelope") {
  const auto& p = library().by_id(6);
  const auto& traj = p.expected_trajectory;
  const int skip = 60;  // 20 % transient allowance

  CHECK(channel_min(traj, 0, skip) > 0.35 * 0.85);
  CHECK(channel_max(traj, 0, skip) < 0.35 * 1.15);

  CHECK(channel_min(traj, 1, skip) > -0.15 * 1.15);
  CHECK(channel_max(traj, 1, skip) < 0.15 * 1.15);
  CHECK(channel_max(traj, 1, skip) > 0.15 * 0.85);   // actually swings
  CHECK(channel_min(traj, 1, skip) < -0.15 * 0.85);

  CHECK(channel_min(traj, 2, skip) > -0.35 * 1.15);
  CHECK(channel_max(traj, 2, skip) < 0.35 * 1.15);
  CHECK(channel_max(traj, 2, skip) > 0.35 * 0.85);
  CHECK(channel_min(traj, 2, skip) < -0.35 * 0.85);
}

TEST_CASE("spiral ramps the yaw rate to its final value") {
  const auto& p = library().by_id(9);
  const auto& traj = p.expected_trajectory;
  CHECK(traj.front().r == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(traj.back().r == doctest::Approx(-0.6).epsilon(0.05));
  const int skip = 60;
  CHECK(channel_min(traj, 0, skip) > 0.4 * 0.85);
  CHECK(channel_max(traj, 0, skip) < 0.4 * 1.15);
  CHECK(channel_min(traj, 1, skip) > 0.05 * 0.85 - 1e-9);
  CHECK(channel_max(traj, 1, skip) < 0.05 * 1.15 + 1e-9);
}

TEST_CASE("unreachable envelope fails naming the violated channel") {
  PrimitiveSpec spec;
  spec.id = 98;
  spec.label = "impossible";
  spec.u = ChannelEnvelope::constant(50.0);  // needs far more force than the limit
  spec.v = ChannelEnvelope::constant(0.0);
  spec.r = ChannelEnvelope::constant(0.0);
  spec.duration = 100;
  SynthesisOptions opt;
  opt.tau_limit = Vec3(2e4, 2e4, 5e3);
  try {
    synthesize_primitive(spec, kParams, opt);
    FAIL("expected SynthesisError");
  } catch (const SynthesisError& e) {
    CHECK(e.channel() == "u");
  }
}

TEST_CASE("displacement of the zero trajectory is zero") {
  const std::vector<BodyVelocity> traj(20, BodyVelocity{});
  const Pose d = displacement_summary(traj, kDt);
  CHECK(d.x == 0.0);
  CHECK(d.y == 0.0);
  CHECK(d.psi == 0.0);
}

TEST_CASE("straight-line displacement matches the closed form") {
  const std::vector<BodyVelocity> traj(8, BodyVelocity{1.0, 0.0, 0.0});
  const Pose d = displacement_summary(traj, 1.0 / 8.0);
  CHECK(d.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.y == doctest::Approx(0.0));
  CHECK(d.psi == doctest::Approx(0.0));
}

TEST_CASE("full zig-zag periods cancel the heading change") {
  for (int id : {3, 4, 5, 6, 7, 8}) {
    const auto& p = library().by_id(id);
    // Displacement over whole periods only (the signal holds 3 full periods).
    const Pose d = displacement_summary(p.expected_trajectory, kDt);
    CHECK(std::abs(d.psi) < 0.05);
  }
}

TEST_CASE("displacement is equivariant under the start heading") {
  const auto& p = library().by_id(6);
  const Pose base = displacement_summary(p, kDt);

  Rng rng(13);
  for (int i = 0; i < 5; ++i) {
    const double psi0 = 2 * M_PI * rng.uniform() - M_PI;
    Pose pose{0.0, 0.0, psi0};
    for (const auto& vel : p.expected_trajectory) pose = kinematics_step(pose, vel, kDt);

    const double c = std::cos(psi0);
    const double s = std::sin(psi0);
    CHECK(pose.x == doctest::Approx(c * base.x - s * base.y).epsilon(1e-9));
    CHECK(pose.y == doctest::Approx(s * base.x + c * base.y).epsilon(1e-9));
    CHECK(wrap_angle(pose.psi - psi0) == doctest::Approx(base.psi).epsilon(1e-9));
  }
}

TEST_CASE("saturation limits are respected by every stored signal") {
  const SynthesisOptions opt;
  for (const auto& p : library().primitives) {
    for (const auto& t : p.input_signal) {
      CHECK(std::abs(t[0]) <= opt.tau_limit[0]);
      CHECK(std::abs(t[1]) <= opt.tau_limit[1]);
      CHECK(std::abs(t[2]) <= opt.tau_limit[2]);
    }
  }
}

TEST_CASE("full-scale envelope definitions cover ids 12 to 20") {
  const auto specs = fullscale_primitive_specs();
  REQUIRE(specs.size() == 9);
  CHECK(specs.front().id == 12);
  CHECK(specs.back().id == 20);
  CHECK(specs[2].v.kind == ChannelEnvelope::Kind::AbsBand);
}
