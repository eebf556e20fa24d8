#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewarn/ekf.hpp"
#include "ewarn/geometry.hpp"
#include "ewarn/rng.hpp"

namespace ewarn {

// Monocular ADAS camera with ground-plane ranging: bearing from the image
// column, range from the foot-point row intersected with the flat road.
// Longitudinal error therefore grows with range squared.
struct CameraModel {
  double hfov_deg = 40.0;
  double vfov_deg = 30.0;
  int image_width = 1280;
  int image_height = 960;
  double mount_height = 1.3;      // m above the ground plane
  double rate_hz = 36.0;
  double pixel_jitter_sigma = 2.0;  // px, applied to column and row
  bool quantize = true;             // round to integer pixels
  double dropout_prob = 0.0;        // per frame per object
  double id_switch_prob = 0.0;      // per reappearance after a dropout
  int pose_lag_frames = 2;          // detections formed from a stale ego pose

  double half_hfov() const { return 0.5 * hfov_deg * M_PI / 180.0; }
  double focal_u() const { return 0.5 * image_width / std::tan(half_hfov()); }
  double focal_v() const {
    return 0.5 * image_height / std::tan(0.5 * vfov_deg * M_PI / 180.0);
  }
  double frame_dt() const { return 1.0 / rate_hz; }
};

// Longitudinal displacement produced by a one-row error at range x.
inline double ground_plane_row_sensitivity(const CameraModel& cam, double x) {
  return x * x / (cam.focal_v() * cam.mount_height);
}

// Projects a vehicle-frame ground point through the camera and back, applying
// the configured pixel noise. Returns nothing when the point is outside the
// field of view, too close for the foot row, or dropped out. truth.x must be
// positive.
std::optional<Vec2> camera_observe(const Vec2& truth_vehicle, const CameraModel& cam,
                                   Rng& rng);

enum class EgoScriptKind { stationary, constant_speed, waypoints };

struct EgoWaypoint {
  Vec2 pos;
  Timestamp t = 0.0;
};

struct EgoScript {
  EgoScriptKind kind = EgoScriptKind::stationary;
  Pose2 start;         // stationary / constant_speed
  double speed = 0.0;  // m/s, constant_speed
  std::vector<EgoWaypoint> waypoints;  // waypoints, time-ordered
};

Pose2 ego_pose_at(const EgoScript& script, Timestamp t);
double ego_speed_at(const EgoScript& script, Timestamp t);

struct Actor {
  ObjectClass cls = ObjectClass::pedestrian;
  Vec2 start;
  Vec2 velocity;  // m/s, world frame
  Timestamp t_start = 0.0;
  Timestamp t_stop = std::numeric_limits<double>::infinity();
};

struct SensorNoise {
  double gyro = 0.01;    // rad/s
  double accel = 0.1;    // m/s^2
  double wheel = 0.05;   // m/s
  double gps = 0.05;     // m
  double gps_rate_hz = 10.0;
  double imu_rate_hz = 200.0;
};

struct Scenario {
  std::string name = "scenario";
  double duration = 10.0;  // s
  std::uint64_t seed = 1;
  EgoScript ego;
  std::vector<Actor> actors;
  CameraModel camera;
  SensorNoise noise;
};

// World-frame ground truth row; the ego vehicle is id 0, actors are 1-based.
struct TruthSample {
  Timestamp t = 0.0;
  int id = 0;
  Vec2 pos;
};

struct GeneratedLogs {
  std::vector<Detection> detections;
  std::vector<TruthSample> truth;
  std::vector<EgoSensorRecord> ego;
};

// Steps ground truth at the camera rate, renders detections through the
// camera noise model, and synthesizes matching IMU/wheel/GPS streams.
// Pure function of the scenario (including its seed).
GeneratedLogs generate(const Scenario& scn);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& scn);

// Named scenario presets (fig5..fig8 reproduce the camera pathology studies;
// leadtime and parallel are the warning-logic benchmarks).
std::vector<std::string> preset_names();
Scenario make_preset(const std::string& name);

}  // namespace ewarn
