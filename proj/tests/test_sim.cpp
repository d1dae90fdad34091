#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "marex/errors.hpp"
#include "marex/rng.hpp"
#include "marex/sim.hpp"

using namespace marex;

namespace {

// Positive equilibrium speed of the surge channel under constant thrust:
// root of x_u*u + x_uu*u|u| + x_tau*tau1 = 0, derived independently of the
// simulator via the quadratic formula.
double surge_equilibrium(const VesselParams& p, double tau1) {
  const double a = -p.x_uu;
  const double b = -p.x_u;
  const double c = -p.x_tau * tau1;
  return (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a);
}

}  // namespace

TEST_CASE("zero state with zero input is a fixed point") {
  const auto p = VesselParams::reference();
  const auto next = step_dynamics(BodyVelocity{}, Vec3::Zero(), p);
  CHECK(next.u == 0.0);
  CHECK(next.v == 0.0);
  CHECK(next.r == 0.0);
}

TEST_CASE("surge update matches hand evaluation") {
  const auto p = VesselParams::reference();
  const auto next = step_dynamics(BodyVelocity{1.0, 0.0, 0.0}, Vec3::Zero(), p);
  CHECK(next.u == doctest::Approx(0.93).epsilon(1e-12));
  CHECK(next.v == 0.0);
  CHECK(next.r == 0.0);
}

TEST_CASE("yaw moment feeds through the actuator gain") {
  const auto p = VesselParams::reference();
  const auto next = step_dynamics(BodyVelocity{}, Vec3(0.0, 0.0, 1.0), p);
  CHECK(next.r == doctest::Approx(3e-4).epsilon(1e-12));
}

TEST_CASE("second-order modulus surge is sign symmetric") {
  const auto p = VesselParams::reference();
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double tau1 = 4000.0 * (2.0 * rng.uniform() - 1.0);
    const auto plus = step_dynamics(BodyVelocity{u, 0.0, 0.0}, Vec3(tau1, 0, 0), p);
    const auto minus = step_dynamics(BodyVelocity{-u, 0.0, 0.0}, Vec3(-tau1, 0, 0), p);
    CHECK(plus.u == doctest::Approx(-minus.u).epsilon(1e-14));
  }
}

TEST_CASE("non-finite input is rejected naming the field") {
  const auto p = VesselParams::reference();
  try {
    step_dynamics(BodyVelocity{std::nan(""), 0, 0}, Vec3::Zero(), p);
    FAIL("expected SimulationError");
  } catch (const SimulationError& e) {
    CHECK(std::string(e.what()).find("state.u") != std::string::npos);
  }
  CHECK_THROWS_AS(step_dynamics(BodyVelocity{}, Vec3(0, std::nan(""), 0), p), SimulationError);
}

TEST_CASE("zero input stays at rest over any length") {
  const auto p = VesselParams::reference();
  const std::vector<Vec3> tau(25, Vec3::Zero());
  const auto sim = simulate(BodyVelocity{}, tau, p, DisturbanceConfig::none());
  REQUIRE(sim.steps.size() == 25);
  for (const auto& s : sim.steps) {
    CHECK(s.state.u == 0.0);
    CHECK(s.y == Vec3::Zero());
  }
}

TEST_CASE("constant surge thrust approaches the equilibrium speed monotonically") {
  const auto p = VesselParams::reference();
  const double tau1 = 5000.0;
  const double target = surge_equilibrium(p, tau1);
  CHECK(target == doctest::Approx(1.0).epsilon(1e-12));  // chosen to land at 1 m/s

  const std::vector<Vec3> tau(400, Vec3(tau1, 0.0, 0.0));
  const auto sim = simulate(BodyVelocity{}, tau, p, DisturbanceConfig::none());
  double prev = -1.0;
  for (const auto& s : sim.steps) {
    CHECK(s.state.u >= prev);
    CHECK(s.state.u <= target + 1e-9);
    prev = s.state.u;
  }
  CHECK(sim.final_state.u == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("identical seeds give bit-identical noisy runs") {
  const auto p = VesselParams::reference();
  DisturbanceConfig dist;
  dist.current_noise = 0.025;
  dist.meas_noise = 0.025;
  dist.seed = 42;

  std::vector<Vec3> tau;
  for (int k = 0; k < 200; ++k) tau.push_back(Vec3(2000.0, 100.0 * std::sin(0.1 * k), 50.0));

  const auto a = simulate(BodyVelocity{}, tau, p, dist);
  const auto b = simulate(BodyVelocity{}, tau, p, dist);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].state.u == b.steps[k].state.u);
    CHECK(a.steps[k].y == b.steps[k].y);
  }

  DisturbanceConfig other = dist;
  other.seed = 43;
  const auto c = simulate(BodyVelocity{}, tau, p, other);
  CHECK(a.steps[0].y != c.steps[0].y);
}

TEST_CASE("variance and stddev interpretations differ as documented") {
  DisturbanceConfig var;
  var.meas_noise = 0.025;
  var.interpretation = NoiseInterpretation::Variance;
  CHECK(var.sigma_meas() == doctest::Approx(std::sqrt(0.025)));

  DisturbanceConfig sd = var;
  sd.interpretation = NoiseInterpretation::StdDev;
  CHECK(sd.sigma_meas() == doctest::Approx(0.025));
}

TEST_CASE("divergence aborts with the step index") {
  VesselParams unstable = VesselParams::reference();
  unstable.x_u = 0.2;   // positive feedback in surge
  unstable.x_uu = 0.05;  // superlinear growth
  const std::vector<Vec3> tau(400, Vec3(5000.0, 0.0, 0.0));
  try {
    simulate(BodyVelocity{1.0, 0, 0}, tau, unstable, DisturbanceConfig::none());
    FAIL("expected divergence");
  } catch (const SimulationError& e) {
    CHECK(e.step() >= 0);
    CHECK(e.step() < 400);
  }
}

TEST_CASE("empty input sequence is rejected") {
  CHECK_THROWS_AS(simulate(BodyVelocity{}, {}, VesselParams::reference(),
                           DisturbanceConfig::none()),
                  SimulationError);
}

TEST_CASE("thruster force examples") {
  const ActuatorGeometry geom{1.0, 0.0, 0.0, 0.0};

  const Vec3 idle = thruster_forces(ThrusterCommand{0, 0, 0, 0}, geom);
  CHECK(idle == Vec3::Zero());

  const Vec3 ahead = thruster_forces(ThrusterCommand{1.0, 0.0, 0.0, 0.0}, geom);
  CHECK(ahead[0] == doctest::Approx(1.0));
  CHECK(ahead[1] == doctest::Approx(0.0));
  CHECK(ahead[2] == doctest::Approx(0.0));

  const Vec3 athwart = thruster_forces(ThrusterCommand{1.0, 0.0, M_PI / 2, 0.0}, geom);
  CHECK(athwart[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(athwart[1] == doctest::Approx(1.0));
  CHECK(athwart[2] == doctest::Approx(1.0));
}

TEST_CASE("thruster forces are linear in each magnitude at fixed angles") {
  const ActuatorGeometry geom{0.8, 0.2, -0.8, -0.2};
  Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    ThrusterCommand cmd;
    cmd.alpha1 = 2 * M_PI * rng.uniform() - M_PI;
    cmd.alpha2 = 2 * M_PI * rng.uniform() - M_PI;
    cmd.n1 = rng.uniform();
    cmd.n2 = rng.uniform();
    const double c = 1.0 + 3.0 * rng.uniform();

    ThrusterCommand scaled1 = cmd;
    scaled1.n1 *= c;
    const Vec3 base = thruster_forces(cmd, geom);
    const Vec3 zero_n1 = thruster_forces(ThrusterCommand{0.0, cmd.n2, cmd.alpha1, cmd.alpha2}, geom);
    const Vec3 got = thruster_forces(scaled1, geom);
    const Vec3 expected = zero_n1 + c * (base - zero_n1);
    CHECK((got - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("kinematics examples") {
  const Pose still = kinematics_step(Pose{2.0, 3.0, 0.5}, BodyVelocity{}, 1.0);
  CHECK(still.x == 2.0);
  CHECK(still.y == 3.0);
  CHECK(still.psi == 0.5);

  const Pose ahead = kinematics_step(Pose{}, BodyVelocity{1.0, 0.0, 0.0}, 1.0);
  CHECK(ahead.x == doctest::Approx(1.0));
  CHECK(ahead.y == doctest::Approx(0.0));

  const Pose rotated = kinematics_step(Pose{0.0, 0.0, M_PI / 2}, BodyVelocity{1.0, 0.0, 0.0}, 1.0);
  CHECK(rotated.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rotated.y == doctest::Approx(1.0));
  CHECK(rotated.psi == doctest::Approx(M_PI / 2));
}

TEST_CASE("heading stays wrapped to (-pi, pi]") {
  Pose pose{0.0, 0.0, 3.0};
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double r = 4.0 * (2.0 * rng.uniform() - 1.0);
    pose = kinematics_step(pose, BodyVelocity{0.3, 0.1, r}, 0.5);
    CHECK(pose.psi > -M_PI);
    CHECK(pose.psi <= M_PI);
  }
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
}

TEST_CASE("constant current mode holds one draw for the whole run") {
  const auto p = VesselParams::reference();
  DisturbanceConfig dist;
  dist.current_noise = 0.05;
  dist.constant_current = true;
  dist.seed = 3;

  // With constant current and no other noise, repeating the same input gives
  // a smooth trajectory converging like the undisturbed one shifted by the
  // current; mostly this checks determinism and that the mode is wired up.
  const std::vector<Vec3> tau(100, Vec3(1000.0, 0.0, 0.0));
  const auto a = simulate(BodyVelocity{}, tau, p, dist);
  const auto b = simulate(BodyVelocity{}, tau, p, dist);
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].state.u == b.steps[k].state.u);
  }
}
