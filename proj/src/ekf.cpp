#include "ewarn/ekf.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ewarn {

namespace {

VehicleState default_init(const EkfConfig& cfg) {
  VehicleState s;
  Cov6 p = Cov6::Zero();
  p(0, 0) = p(1, 1) = cfg.init_sigma_pos * cfg.init_sigma_pos;
  p(2, 2) = cfg.init_sigma_yaw * cfg.init_sigma_yaw;
  p(3, 3) = p(4, 4) = cfg.init_sigma_pitchroll * cfg.init_sigma_pitchroll;
  p(5, 5) = cfg.init_sigma_speed * cfg.init_sigma_speed;
  s.covariance = p;
  return s;
}

double clamp_unit(double v) { return std::max(-1.0, std::min(1.0, v)); }

}  // namespace

double min_covariance_eigenvalue(const Cov6& p) {
  Eigen::SelfAdjointEigenSolver<Cov6> es(p);
  return es.eigenvalues().minCoeff();
}

EgoEkf::EgoEkf(EkfConfig cfg) : EgoEkf(cfg, default_init(cfg)) {}

EgoEkf::EgoEkf(EkfConfig cfg, const VehicleState& init) : cfg_(cfg), state_(init) {}

void EgoEkf::predict(const ImuSample& imu) {
  const double dt = imu.t - state_.t;
  if (dt < 0.0) {
    std::ostringstream msg;
    msg << "non-monotonic IMU timestamp: " << imu.t << " < " << state_.t;
    throw std::invalid_argument(msg.str());
  }

  const double yaw = state_.pose.heading;
  const double v = state_.speed;
  const double c = std::cos(yaw), s = std::sin(yaw);

  state_.pose.position.x += v * c * dt;
  state_.pose.position.y += v * s * dt;
  state_.pose.heading = normalize_angle(yaw + imu.gyro[2] * dt);
  state_.speed += (imu.accel[0] - kGravity * std::sin(state_.pitch)) * dt;
  if (state_.speed < 0.0) state_.speed = 0.0;
  state_.t = imu.t;

  Cov6 f = Cov6::Identity();
  f(0, 2) = -v * s * dt;
  f(0, 5) = c * dt;
  f(1, 2) = v * c * dt;
  f(1, 5) = s * dt;
  f(5, 3) = -kGravity * std::cos(state_.pitch) * dt;

  Cov6 q = Cov6::Zero();
  const double qp = cfg_.sigma_pos_process * dt;
  const double qyaw = cfg_.sigma_gyro * dt;
  const double qpr = cfg_.sigma_pitchroll_process * dt;
  const double qv = cfg_.sigma_accel * dt;
  q(0, 0) = q(1, 1) = qp * qp;
  q(2, 2) = qyaw * qyaw;
  q(3, 3) = q(4, 4) = qpr * qpr;
  q(5, 5) = qv * qv;

  state_.covariance = f * state_.covariance * f.transpose() + q;
  finalize_covariance("predict");

  // Gravity direction observes pitch/roll. Longitudinal acceleration is
  // assumed near zero and the lateral channel is compensated for the
  // centripetal term v*yaw_rate; the small resulting bias is absorbed by the
  // low steady-state gain.
  if (dt > 0.0) {
    const double pitch_meas = std::asin(clamp_unit(imu.accel[0] / kGravity));
    const double roll_meas =
        -std::asin(clamp_unit((imu.accel[1] - state_.speed * imu.gyro[2]) / kGravity));
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 6);
    h(0, 3) = 1.0;
    h(1, 4) = 1.0;
    Eigen::VectorXd innovation(2);
    innovation << pitch_meas - state_.pitch, roll_meas - state_.roll;
    const double r_pr = (cfg_.sigma_accel / kGravity) * (cfg_.sigma_accel / kGravity);
    kalman_update(h, innovation, r_pr * Eigen::MatrixXd::Identity(2, 2), nullptr);
    finalize_covariance("pitch/roll update");
  }
}

void EgoEkf::update(const WheelSample& wheel) {
  check_measurement_time(wheel.t, "wheel");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 6);
  h(0, 5) = 1.0;
  Eigen::VectorXd innovation(1);
  innovation << wheel.speed - state_.speed;
  Eigen::MatrixXd r(1, 1);
  r << cfg_.sigma_wheel * cfg_.sigma_wheel;
  kalman_update(h, innovation, r, nullptr);
  if (state_.speed < 0.0) state_.speed = 0.0;
  finalize_covariance("wheel update");
}

void EgoEkf::update(const GpsFix& gps) {
  check_measurement_time(gps.t, "gps");
  if (gps.sigma_pos <= 0.0) throw std::invalid_argument("GpsFix.sigma_pos must be > 0");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 6);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  Eigen::VectorXd innovation(2);
  innovation << gps.pos.x - state_.pose.position.x, gps.pos.y - state_.pose.position.y;
  kalman_update(h, innovation, gps.sigma_pos * gps.sigma_pos * Eigen::MatrixXd::Identity(2, 2),
                &last_gps_nis_);
  finalize_covariance("gps update");
}

void EgoEkf::kalman_update(const Eigen::MatrixXd& h, const Eigen::VectorXd& innovation,
                           const Eigen::MatrixXd& r, double* nis_out) {
  if (!innovation.allFinite()) throw std::runtime_error("non-finite innovation");

  const Eigen::MatrixXd s = h * state_.covariance * h.transpose() + r;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
  if (!lu.isInvertible()) {
    throw std::runtime_error("singular innovation covariance (check noise configuration)");
  }
  const Eigen::MatrixXd s_inv = lu.inverse();
  if (nis_out != nullptr) *nis_out = innovation.dot(s_inv * innovation);

  const Eigen::MatrixXd k = state_.covariance * h.transpose() * s_inv;
  apply_delta(k * innovation);

  // Joseph form keeps the covariance symmetric PSD.
  const Cov6 ikh = Cov6::Identity() - k * h;
  state_.covariance =
      ikh * state_.covariance * ikh.transpose() + k * r * k.transpose();
}

void EgoEkf::apply_delta(const Eigen::Matrix<double, 6, 1>& dx) {
  state_.pose.position.x += dx(0);
  state_.pose.position.y += dx(1);
  state_.pose.heading = normalize_angle(state_.pose.heading + dx(2));
  state_.pitch += dx(3);
  state_.roll += dx(4);
  state_.speed += dx(5);
}

void EgoEkf::check_measurement_time(Timestamp t, const char* what) const {
  if (t < state_.t - cfg_.out_of_order_tolerance) {
    std::ostringstream msg;
    msg << what << " measurement too old: t=" << t << " filter t=" << state_.t;
    throw std::invalid_argument(msg.str());
  }
}

void EgoEkf::finalize_covariance(const char* what) {
  state_.covariance = 0.5 * (state_.covariance + state_.covariance.transpose()).eval();
  if (cfg_.validate_covariance) {
    const double lambda_min = min_covariance_eigenvalue(state_.covariance);
    if (!(lambda_min >= -1e-9)) {
      std::ostringstream msg;
      msg << "covariance lost positive semi-definiteness after " << what
          << " (min eigenvalue " << lambda_min << ")";
      throw std::logic_error(msg.str());
    }
  }
}

}  // namespace ewarn
