#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace ewarn {

// Seconds since scenario epoch.
using Timestamp = double;

constexpr double kMphToMps = 0.44704;
constexpr double kGravity = 9.80665;        // m/s^2
constexpr double kCameraPeriod = 1.0 / 36.0;  // s, nominal ADAS camera frame time

struct Vec2 {
  double x = 0.0;  // longitudinal, meters
  double y = 0.0;  // lateral, meters (+y is left)

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// World-frame pose on the local ENU plane.
struct Pose2 {
  Vec2 position;
  double heading = 0.0;  // radians in (-pi, pi]
};

enum class ObjectClass { pedestrian, bicycle, vehicle };

inline const char* to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::pedestrian: return "pedestrian";
    case ObjectClass::bicycle: return "bicycle";
    case ObjectClass::vehicle: return "vehicle";
  }
  return "pedestrian";
}

inline std::optional<ObjectClass> object_class_from_string(const std::string& s) {
  if (s == "pedestrian") return ObjectClass::pedestrian;
  if (s == "bicycle") return ObjectClass::bicycle;
  if (s == "vehicle") return ObjectClass::vehicle;
  return std::nullopt;
}

// One camera-frame observation, in the vehicle frame (x forward, y left).
struct Detection {
  Timestamp t = 0.0;
  int track_id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  Vec2 pos_vehicle;
};

// Fixed world->analysis rotation, set once from the ego's initial heading so
// the vehicle faces +x in the analysis frame.
struct FrameSet {
  double analysis_rotation = 0.0;

  static FrameSet from_initial_heading(double heading) { return FrameSet{heading}; }
};

struct StaleEgoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Vec2 to_world(const Detection& det, const Pose2& ego);

// Same transform but checks the ego snapshot is fresh enough for the frame.
Vec2 to_world_checked(const Detection& det, const Pose2& ego, Timestamp ego_t,
                      double tolerance = kCameraPeriod);

inline Vec2 to_analysis(const Vec2& p_world, const FrameSet& frames) {
  return rotate(p_world, -frames.analysis_rotation);
}

inline Vec2 from_analysis(const Vec2& p_analysis, const FrameSet& frames) {
  return rotate(p_analysis, frames.analysis_rotation);
}

inline Vec2 world_to_vehicle(const Vec2& p_world, const Pose2& ego) {
  return rotate(p_world - ego.position, -ego.heading);
}

}  // namespace ewarn
