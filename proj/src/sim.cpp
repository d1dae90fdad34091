#include "marex/sim.hpp"

#include <cmath>
#include <string>

#include "marex/errors.hpp"
#include "marex/rng.hpp"

namespace marex {

VesselParams VesselParams::reference() {
  VesselParams p;
  p.x_u = -0.06;
  p.x_uu = -0.01;
  p.x_vr = 0.08;
  p.x_tau = 1.4e-5;
  p.y_v = -0.1;
  p.y_ur = -0.006;
  p.y_tau = 1.4e-5;
  p.n_r = -0.35;
  p.n_uv = -0.03;
  p.n_tau = 3e-4;
  return p;
}

Eigen::VectorXd VesselParams::theta() const {
  Eigen::VectorXd t(kNumParams);
  t << x_u, x_uu, x_vr, x_tau, y_v, y_ur, y_tau, n_r, n_uv, n_tau;
  return t;
}

VesselParams VesselParams::from_theta(const Eigen::VectorXd& theta) {
  if (theta.size() != kNumParams) {
    throw ConfigError("parameter vector must have " + std::to_string(kNumParams) +
                      " entries, got " + std::to_string(theta.size()));
  }
  VesselParams p;
  p.x_u = theta[0];
  p.x_uu = theta[1];
  p.x_vr = theta[2];
  p.x_tau = theta[3];
  p.y_v = theta[4];
  p.y_ur = theta[5];
  p.y_tau = theta[6];
  p.n_r = theta[7];
  p.n_uv = theta[8];
  p.n_tau = theta[9];
  return p;
}

void VesselParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("vessel parameters: ") + what);
  };
  require(x_u < 0.0, "x_u must be strictly negative");
  require(x_uu < 0.0, "x_uu must be strictly negative");
  require(y_v < 0.0, "y_v must be strictly negative");
  require(n_r < 0.0, "n_r must be strictly negative");
  require(x_tau > 0.0, "x_tau must be strictly positive");
  require(y_tau > 0.0, "y_tau must be strictly positive");
  require(n_tau > 0.0, "n_tau must be strictly positive");
}

double wrap_angle(double a) {
  double w = std::fmod(a + M_PI, 2.0 * M_PI);
  if (w <= 0.0) w += 2.0 * M_PI;
  return w - M_PI;
}

namespace {

double resolve_sigma(double value, NoiseInterpretation interp, const char* name) {
  if (value < 0.0) {
    throw ConfigError(std::string(name) + " must be nonnegative");
  }
  return interp == NoiseInterpretation::Variance ? std::sqrt(value) : value;
}

}  // namespace

double DisturbanceConfig::sigma_current() const {
  return resolve_sigma(current_noise, interpretation, "current_noise");
}

double DisturbanceConfig::sigma_meas() const {
  return resolve_sigma(meas_noise, interpretation, "meas_noise");
}

double DisturbanceConfig::sigma_process() const {
  return resolve_sigma(process_noise, interpretation, "process_noise");
}

namespace {

void check_finite(double x, const char* field) {
  if (!std::isfinite(x)) {
    throw SimulationError(std::string("non-finite input: ") + field);
  }
}

}  // namespace

BodyVelocity step_dynamics(const BodyVelocity& state, const Vec3& tau,
                           const VesselParams& params, const DisturbanceSample& dist) {
  check_finite(state.u, "state.u");
  check_finite(state.v, "state.v");
  check_finite(state.r, "state.r");
  check_finite(tau[0], "tau1");
  check_finite(tau[1], "tau2");
  check_finite(tau[2], "tau3");
  check_finite(dist.u_c, "u_c");
  check_finite(dist.v_c, "v_c");

  const double u_r = state.u - dist.u_c;
  const double v_r = state.v - dist.v_c;
  const double r = state.r;

  BodyVelocity next;
  next.u = state.u + params.x_u * u_r + params.x_uu * u_r * std::abs(u_r) +
           params.x_vr * v_r * r + params.x_tau * tau[0] + dist.w[0];
  next.v = state.v + params.y_v * v_r + params.y_ur * u_r * r + params.y_tau * tau[1] + dist.w[1];
  next.r = state.r + params.n_r * r + params.n_uv * u_r * v_r + params.n_tau * tau[2] + dist.w[2];
  return next;
}

std::vector<Vec3> SimResult::outputs() const {
  std::vector<Vec3> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.y);
  return out;
}

std::vector<Vec3> SimResult::states() const {
  std::vector<Vec3> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.state.vec());
  return out;
}

SimResult simulate(const BodyVelocity& initial, const std::vector<Vec3>& tau,
                   const VesselParams& params, const DisturbanceConfig& dist,
                   const SimOptions& opt) {
  if (tau.empty()) {
    throw SimulationError("input sequence is empty");
  }

  Rng rng(dist.seed);
  const double sc = dist.sigma_current();
  const double sm = dist.sigma_meas();
  const double sw = dist.sigma_process();

  DisturbanceSample held;
  if (dist.constant_current && sc > 0.0) {
    held.u_c = rng.gaussian(0.0, sc);
    held.v_c = rng.gaussian(0.0, sc);
  }

  SimResult result;
  result.steps.reserve(tau.size());
  BodyVelocity state = initial;
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const double bound = opt.divergence_bound;
    if (std::abs(state.u) > bound || std::abs(state.v) > bound || std::abs(state.r) > bound) {
      throw SimulationError("state diverged at step " + std::to_string(k),
                            static_cast<long>(k));
    }

    Vec3 y = state.vec();
    if (sm > 0.0) {
      y[0] += rng.gaussian(0.0, sm);
      y[1] += rng.gaussian(0.0, sm);
      y[2] += rng.gaussian(0.0, sm);
    }
    result.steps.push_back(SimStep{state, y});

    DisturbanceSample d = held;
    if (!dist.constant_current && sc > 0.0) {
      d.u_c = rng.gaussian(0.0, sc);
      d.v_c = rng.gaussian(0.0, sc);
    }
    if (sw > 0.0) {
      d.w[0] = rng.gaussian(0.0, sw);
      d.w[1] = rng.gaussian(0.0, sw);
      d.w[2] = rng.gaussian(0.0, sw);
    }
    state = step_dynamics(state, tau[k], params, d);
  }

  if (!std::isfinite(state.u) || !std::isfinite(state.v) || !std::isfinite(state.r)) {
    throw SimulationError("state diverged at step " + std::to_string(tau.size() - 1),
                          static_cast<long>(tau.size() - 1));
  }
  result.final_state = state;
  return result;
}

Vec3 thruster_forces(const ThrusterCommand& cmd, const ActuatorGeometry& geom) {
  check_finite(cmd.n1, "n1");
  check_finite(cmd.n2, "n2");
  check_finite(cmd.alpha1, "alpha1");
  check_finite(cmd.alpha2, "alpha2");

  const double a1 = wrap_angle(cmd.alpha1);
  const double a2 = wrap_angle(cmd.alpha2);

  const double fx1 = cmd.n1 * std::cos(a1);
  const double fy1 = cmd.n1 * std::sin(a1);
  const double fx2 = cmd.n2 * std::cos(a2);
  const double fy2 = cmd.n2 * std::sin(a2);

  Vec3 tau;
  tau[0] = fx1 + fx2;
  tau[1] = fy1 + fy2;
  tau[2] = geom.ly1 * fx1 + geom.lx1 * fy1 + geom.ly2 * fx2 + geom.lx2 * fy2;
  return tau;
}

Pose kinematics_step(const Pose& pose, const BodyVelocity& vel, double dt) {
  if (!(dt > 0.0)) {
    throw SimulationError("kinematics_step requires dt > 0");
  }
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);
  Pose next;
  next.x = pose.x + dt * (vel.u * c - vel.v * s);
  next.y = pose.y + dt * (vel.u * s + vel.v * c);
  next.psi = wrap_angle(pose.psi + dt * vel.r);
  return next;
}

}  // namespace marex
