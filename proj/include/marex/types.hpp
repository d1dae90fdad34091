#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace marex {

using Vec3 = Eigen::Vector3d;

inline constexpr int kNumParams = 10;   // surge(4) + sway(3) + yaw(3) coefficients
inline constexpr int kNumOutputs = 3;   // u, v, r measured directly

inline constexpr double kSampleRateHz = 8.0;
inline constexpr double kDt = 1.0 / kSampleRateHz;

// Discrete-time coefficients of the 3-DOF second-order modulus model, in the
// order surge (x_*), sway (y_*), yaw (n_*).
struct VesselParams {
  double x_u = 0.0;
  double x_uu = 0.0;
  double x_vr = 0.0;
  double x_tau = 0.0;
  double y_v = 0.0;
  double y_ur = 0.0;
  double y_tau = 0.0;
  double n_r = 0.0;
  double n_uv = 0.0;
  double n_tau = 0.0;

  // Small-scale reference vessel.
  static VesselParams reference();

  // Coefficients as a flat 10-vector in declaration order (and back).
  Eigen::VectorXd theta() const;
  static VesselParams from_theta(const Eigen::VectorXd& theta);

  // Checks the sign conventions expected of a physical vessel: damping
  // strictly negative, actuator gains strictly positive. Throws ConfigError.
  void validate() const;
};

struct BodyVelocity {
  double u = 0.0;  // surge, m/s
  double v = 0.0;  // sway, m/s
  double r = 0.0;  // yaw rate, rad/s

  Vec3 vec() const { return Vec3(u, v, r); }
  static BodyVelocity from(const Vec3& s) { return BodyVelocity{s[0], s[1], s[2]}; }
};

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // heading, kept in (-pi, pi]
};

enum class NoiseInterpretation { Variance, StdDev };

// Disturbance model: i.i.d. Gaussian ocean-current components, additive
// Gaussian measurement noise, optional process noise (zero by default).
// Noise levels are stored as variances unless `interpretation` says StdDev.
struct DisturbanceConfig {
  double current_noise = 0.0;
  double meas_noise = 0.0;
  double process_noise = 0.0;
  NoiseInterpretation interpretation = NoiseInterpretation::Variance;
  bool constant_current = false;  // sample the current once and hold it
  std::uint64_t seed = 0;

  double sigma_current() const;
  double sigma_meas() const;
  double sigma_process() const;

  static DisturbanceConfig none() { return DisturbanceConfig{}; }
  bool is_zero() const { return current_noise == 0.0 && meas_noise == 0.0 && process_noise == 0.0; }
};

struct ThrusterCommand {
  double n1 = 0.0;
  double n2 = 0.0;
  double alpha1 = 0.0;  // azimuth angle, rad
  double alpha2 = 0.0;
};

struct ActuatorGeometry {
  double lx1 = 0.0;
  double ly1 = 0.0;
  double lx2 = 0.0;
  double ly2 = 0.0;
};

}  // namespace marex
