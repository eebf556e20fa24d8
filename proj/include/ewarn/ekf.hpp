#pragma once

#include <Eigen/Dense>
#include <array>
#include <variant>

#include "ewarn/geometry.hpp"

namespace ewarn {

struct ImuSample {
  Timestamp t = 0.0;
  std::array<double, 3> gyro{};   // rad/s, body x/y/z
  std::array<double, 3> accel{};  // m/s^2 specific force, body x/y/z
};

struct WheelSample {
  Timestamp t = 0.0;
  double speed = 0.0;  // m/s, mean of wheel speeds
};

struct GpsFix {
  Timestamp t = 0.0;
  Vec2 pos;               // world ENU meters
  double sigma_pos = 0.05;  // meters, per axis
};

// One line of the ego sensor log.
using EgoSensorRecord = std::variant<ImuSample, WheelSample, GpsFix>;

inline Timestamp record_time(const EgoSensorRecord& rec) {
  return std::visit([](const auto& r) { return r.t; }, rec);
}

using Cov6 = Eigen::Matrix<double, 6, 6>;

// Fused ego state over (x, y, yaw, pitch, roll, v).
struct VehicleState {
  Timestamp t = 0.0;
  Pose2 pose;
  double pitch = 0.0;
  double roll = 0.0;
  double speed = 0.0;
  Cov6 covariance = Cov6::Identity();
};

struct EkfConfig {
  // Sensor noise, per sample. RTK-grade GPS by default.
  double sigma_gyro = 0.01;    // rad/s
  double sigma_accel = 0.1;    // m/s^2
  double sigma_wheel = 0.05;   // m/s
  double sigma_gps = 0.05;     // m
  double gps_rate_hz = 10.0;

  // Process noise densities.
  double sigma_pos_process = 1e-4;        // m/sqrt(s), direct position walk
  double sigma_pitchroll_process = 0.002; // rad/sqrt(s)

  // Initial 1-sigma uncertainty.
  double init_sigma_pos = 10.0;
  double init_sigma_yaw = 0.5;
  double init_sigma_pitchroll = 0.1;
  double init_sigma_speed = 10.0;

  // Measurements this late (relative to the filter clock) are still applied
  // against the current state; older ones are an error.
  double out_of_order_tolerance = 0.010;  // s

  // Eigenvalue check of the covariance after every step.
  bool validate_covariance = true;
};

double min_covariance_eigenvalue(const Cov6& p);

// Extended Kalman filter over (x, y, yaw, pitch, roll, v), fed by 200 Hz
// IMU/wheel samples and ~10 Hz GPS fixes. Single-writer: one owner calls
// predict/update sequentially; state() returns a value snapshot.
class EgoEkf {
 public:
  explicit EgoEkf(EkfConfig cfg = {});
  EgoEkf(EkfConfig cfg, const VehicleState& init);

  const VehicleState& state() const { return state_; }

  // Dead-reckoning propagation to imu.t plus a low-gain pitch/roll update
  // from the accelerometer gravity direction. Throws on non-monotonic time.
  void predict(const ImuSample& imu);

  void update(const WheelSample& wheel);
  void update(const GpsFix& gps);

  // Normalized innovation squared of the most recent GPS update.
  double last_gps_nis() const { return last_gps_nis_; }

 private:
  void kalman_update(const Eigen::MatrixXd& h, const Eigen::VectorXd& innovation,
                     const Eigen::MatrixXd& r, double* nis_out);
  void apply_delta(const Eigen::Matrix<double, 6, 1>& dx);
  void check_measurement_time(Timestamp t, const char* what) const;
  void finalize_covariance(const char* what);

  EkfConfig cfg_;
  VehicleState state_;
  double last_gps_nis_ = 0.0;
};

}  // namespace ewarn
