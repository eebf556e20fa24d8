#include "ewarn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ewarn {

std::optional<Vec2> camera_observe(const Vec2& truth_vehicle, const CameraModel& cam,
                                   Rng& rng) {
  if (truth_vehicle.x <= 0.0) {
    throw std::invalid_argument("camera_observe: point is behind the camera");
  }

  const double bearing = std::atan2(truth_vehicle.y, truth_vehicle.x);
  if (std::abs(bearing) > cam.half_hfov()) return std::nullopt;

  if (cam.dropout_prob > 0.0 && rng.uniform() < cam.dropout_prob) return std::nullopt;

  const double fu = cam.focal_u();
  const double fv = cam.focal_v();

  // Column from the lateral tangent, row from the foot point on the ground
  // plane (offset below the horizon).
  double u = fu * truth_vehicle.y / truth_vehicle.x;
  double v = fv * cam.mount_height / truth_vehicle.x;
  if (v > 0.5 * cam.image_height) return std::nullopt;  // foot below the image

  if (cam.pixel_jitter_sigma > 0.0) {
    u += rng.normal(0.0, cam.pixel_jitter_sigma);
    v += rng.normal(0.0, cam.pixel_jitter_sigma);
  }
  if (cam.quantize) {
    u = std::round(u);
    v = std::round(v);
  }
  if (v < 0.5) return std::nullopt;  // at or above the horizon after noise

  const double x = fv * cam.mount_height / v;
  const double y = x * u / fu;
  return Vec2{x, y};
}

Pose2 ego_pose_at(const EgoScript& script, Timestamp t) {
  switch (script.kind) {
    case EgoScriptKind::stationary:
      return script.start;
    case EgoScriptKind::constant_speed: {
      Pose2 pose = script.start;
      pose.position =
          pose.position + rotate({script.speed * t, 0.0}, pose.heading);
      return pose;
    }
    case EgoScriptKind::waypoints: {
      const auto& wp = script.waypoints;
      if (wp.size() < 2) throw std::invalid_argument("waypoint script needs >= 2 points");
      if (t <= wp.front().t) {
        const Vec2 dir = wp[1].pos - wp[0].pos;
        return {wp.front().pos, std::atan2(dir.y, dir.x)};
      }
      for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
        if (t <= wp[i + 1].t) {
          const double span = wp[i + 1].t - wp[i].t;
          const double u = span > 0.0 ? (t - wp[i].t) / span : 1.0;
          const Vec2 dir = wp[i + 1].pos - wp[i].pos;
          return {wp[i].pos + dir * u, std::atan2(dir.y, dir.x)};
        }
      }
      const Vec2 dir = wp[wp.size() - 1].pos - wp[wp.size() - 2].pos;
      return {wp.back().pos, std::atan2(dir.y, dir.x)};
    }
  }
  return script.start;
}

double ego_speed_at(const EgoScript& script, Timestamp t) {
  switch (script.kind) {
    case EgoScriptKind::stationary:
      return 0.0;
    case EgoScriptKind::constant_speed:
      return script.speed;
    case EgoScriptKind::waypoints: {
      const auto& wp = script.waypoints;
      for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
        if (t <= wp[i + 1].t) {
          const double span = wp[i + 1].t - wp[i].t;
          if (span <= 0.0) return 0.0;
          return (wp[i + 1].pos - wp[i].pos).norm() / span;
        }
      }
      return 0.0;
    }
  }
  return 0.0;
}

namespace {

void validate(const Scenario& scn) {
  if (!(scn.duration > 0.0)) throw std::invalid_argument("scenario duration must be > 0");
  if (scn.camera.rate_hz <= 0.0) throw std::invalid_argument("camera rate must be > 0");
  if (scn.camera.hfov_deg <= 0.0 || scn.camera.hfov_deg >= 180.0) {
    throw std::invalid_argument("camera hfov must be in (0, 180) degrees");
  }
  for (const Actor& actor : scn.actors) {
    if (actor.cls == ObjectClass::pedestrian && actor.velocity.norm() > 3.5) {
      std::ostringstream msg;
      msg << "invalid script: pedestrian speed " << actor.velocity.norm()
          << " m/s exceeds 3.5 m/s";
      throw std::invalid_argument(msg.str());
    }
  }
}

Vec2 actor_pos_at(const Actor& actor, Timestamp t) {
  return actor.start + actor.velocity * (t - actor.t_start);
}

bool actor_alive(const Actor& actor, Timestamp t) {
  return t >= actor.t_start && t <= actor.t_stop;
}

}  // namespace

GeneratedLogs generate(const Scenario& scn) {
  validate(scn);

  GeneratedLogs logs;
  const Rng root(scn.seed);
  Rng cam_rng = root.fork("camera");
  Rng switch_rng = root.fork("id-switch");
  Rng imu_rng = root.fork("imu");
  Rng wheel_rng = root.fork("wheel");
  Rng gps_rng = root.fork("gps");

  // Camera pass: truth rows and detections, with id switches injected when a
  // track resumes after a missed frame.
  const double cam_dt = scn.camera.frame_dt();
  const int frames = static_cast<int>(std::floor(scn.duration / cam_dt)) + 1;
  const double lag =
      scn.ego.kind == EgoScriptKind::stationary
          ? 0.0
          : scn.camera.pose_lag_frames * cam_dt;

  struct ActorTrack {
    int camera_id = 0;       // 0 = never seen
    bool seen_last_frame = false;
  };
  std::vector<ActorTrack> actor_tracks(scn.actors.size());
  int next_camera_id = 1;

  for (int k = 0; k < frames; ++k) {
    const double t = k * cam_dt;
    const Pose2 ego_now = ego_pose_at(scn.ego, t);
    const Pose2 ego_lagged = ego_pose_at(scn.ego, std::max(0.0, t - lag));

    logs.truth.push_back({t, 0, ego_now.position});

    for (std::size_t a = 0; a < scn.actors.size(); ++a) {
      const Actor& actor = scn.actors[a];
      if (!actor_alive(actor, t)) {
        actor_tracks[a].seen_last_frame = false;
        continue;
      }
      const Vec2 world = actor_pos_at(actor, t);
      logs.truth.push_back({t, static_cast<int>(a) + 1, world});

      // The camera forms its measurement from a slightly stale ego pose; the
      // consumer will undo it with the fresh pose, which reproduces the
      // overcorrection seen on a moving vehicle.
      const Vec2 rel = world_to_vehicle(world, ego_lagged);
      std::optional<Vec2> meas;
      if (rel.x > 0.0) meas = camera_observe(rel, scn.camera, cam_rng);

      ActorTrack& track = actor_tracks[a];
      if (meas) {
        const bool reappearing = track.camera_id != 0 && !track.seen_last_frame;
        if (track.camera_id == 0) {
          track.camera_id = next_camera_id++;
        } else if (reappearing && scn.camera.id_switch_prob > 0.0 &&
                   switch_rng.uniform() < scn.camera.id_switch_prob) {
          track.camera_id = next_camera_id++;
        }
        logs.detections.push_back({t, track.camera_id, actor.cls, *meas});
        track.seen_last_frame = true;
      } else {
        track.seen_last_frame = false;
      }
    }
  }

  // Ego sensor pass: IMU + wheel at the inertial rate, GPS at its own rate.
  const double imu_dt = 1.0 / scn.noise.imu_rate_hz;
  const int imu_samples = static_cast<int>(std::floor(scn.duration / imu_dt)) + 1;
  double prev_heading = ego_pose_at(scn.ego, 0.0).heading;
  double prev_speed = ego_speed_at(scn.ego, 0.0);
  for (int k = 0; k < imu_samples; ++k) {
    const double t = k * imu_dt;
    const Pose2 pose = ego_pose_at(scn.ego, t);
    const double speed = ego_speed_at(scn.ego, t);
    const double yaw_rate =
        k == 0 ? 0.0 : normalize_angle(pose.heading - prev_heading) / imu_dt;
    const double accel_long = k == 0 ? 0.0 : (speed - prev_speed) / imu_dt;
    prev_heading = pose.heading;
    prev_speed = speed;

    ImuSample imu;
    imu.t = t;
    imu.gyro = {imu_rng.normal(0.0, scn.noise.gyro), imu_rng.normal(0.0, scn.noise.gyro),
                yaw_rate + imu_rng.normal(0.0, scn.noise.gyro)};
    imu.accel = {accel_long + imu_rng.normal(0.0, scn.noise.accel),
                 speed * yaw_rate + imu_rng.normal(0.0, scn.noise.accel),
                 kGravity + imu_rng.normal(0.0, scn.noise.accel)};
    logs.ego.emplace_back(imu);

    WheelSample wheel;
    wheel.t = t;
    // Wheel ticks vanish at standstill; the sensor reports exact zero.
    wheel.speed = speed < 0.05
                      ? 0.0
                      : std::max(0.0, speed + wheel_rng.normal(0.0, scn.noise.wheel));
    logs.ego.emplace_back(wheel);
  }

  const double gps_dt = 1.0 / scn.noise.gps_rate_hz;
  const int gps_samples = static_cast<int>(std::floor(scn.duration / gps_dt)) + 1;
  std::vector<GpsFix> fixes;
  for (int k = 0; k < gps_samples; ++k) {
    const double t = k * gps_dt;
    const Pose2 pose = ego_pose_at(scn.ego, t);
    GpsFix fix;
    fix.t = t;
    fix.pos = {pose.position.x + gps_rng.normal(0.0, scn.noise.gps),
               pose.position.y + gps_rng.normal(0.0, scn.noise.gps)};
    // Declared uncertainty keeps a floor so noiseless runs stay well-posed
    // for the fusion filter.
    fix.sigma_pos = std::max(scn.noise.gps, 1e-3);
    fixes.push_back(fix);
  }

  // Merge GPS into the (already time-ordered) IMU/wheel stream: stable order,
  // GPS after inertial records with the same timestamp.
  std::vector<EgoSensorRecord> merged;
  merged.reserve(logs.ego.size() + fixes.size());
  std::size_t gi = 0;
  for (const EgoSensorRecord& rec : logs.ego) {
    while (gi < fixes.size() && fixes[gi].t < record_time(rec) - 1e-12) {
      merged.emplace_back(fixes[gi++]);
    }
    merged.push_back(rec);
  }
  while (gi < fixes.size()) merged.emplace_back(fixes[gi++]);
  logs.ego = std::move(merged);

  return logs;
}

namespace {

nlohmann::ordered_json camera_to_json(const CameraModel& cam) {
  nlohmann::ordered_json j;
  j["hfov_deg"] = cam.hfov_deg;
  j["vfov_deg"] = cam.vfov_deg;
  j["image_width"] = cam.image_width;
  j["image_height"] = cam.image_height;
  j["mount_height"] = cam.mount_height;
  j["rate_hz"] = cam.rate_hz;
  j["pixel_jitter_sigma"] = cam.pixel_jitter_sigma;
  j["quantize"] = cam.quantize;
  j["dropout_prob"] = cam.dropout_prob;
  j["id_switch_prob"] = cam.id_switch_prob;
  j["pose_lag_frames"] = cam.pose_lag_frames;
  return j;
}

CameraModel camera_from_json(const nlohmann::json& j) {
  CameraModel cam;
  cam.hfov_deg = j.value("hfov_deg", cam.hfov_deg);
  cam.vfov_deg = j.value("vfov_deg", cam.vfov_deg);
  cam.image_width = j.value("image_width", cam.image_width);
  cam.image_height = j.value("image_height", cam.image_height);
  cam.mount_height = j.value("mount_height", cam.mount_height);
  cam.rate_hz = j.value("rate_hz", cam.rate_hz);
  cam.pixel_jitter_sigma = j.value("pixel_jitter_sigma", cam.pixel_jitter_sigma);
  cam.quantize = j.value("quantize", cam.quantize);
  cam.dropout_prob = j.value("dropout_prob", cam.dropout_prob);
  cam.id_switch_prob = j.value("id_switch_prob", cam.id_switch_prob);
  cam.pose_lag_frames = j.value("pose_lag_frames", cam.pose_lag_frames);
  return cam;
}

nlohmann::ordered_json noise_to_json(const SensorNoise& n) {
  nlohmann::ordered_json j;
  j["gyro"] = n.gyro;
  j["accel"] = n.accel;
  j["wheel"] = n.wheel;
  j["gps"] = n.gps;
  j["gps_rate_hz"] = n.gps_rate_hz;
  j["imu_rate_hz"] = n.imu_rate_hz;
  return j;
}

SensorNoise noise_from_json(const nlohmann::json& j) {
  SensorNoise n;
  n.gyro = j.value("gyro", n.gyro);
  n.accel = j.value("accel", n.accel);
  n.wheel = j.value("wheel", n.wheel);
  n.gps = j.value("gps", n.gps);
  n.gps_rate_hz = j.value("gps_rate_hz", n.gps_rate_hz);
  n.imu_rate_hz = j.value("imu_rate_hz", n.imu_rate_hz);
  return n;
}

const char* script_kind_name(EgoScriptKind kind) {
  switch (kind) {
    case EgoScriptKind::stationary: return "stationary";
    case EgoScriptKind::constant_speed: return "constant_speed";
    case EgoScriptKind::waypoints: return "waypoints";
  }
  return "stationary";
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario scn;
  scn.name = j.value("name", scn.name);
  scn.duration = j.value("duration", scn.duration);
  scn.seed = j.value("seed", scn.seed);

  if (j.contains("ego")) {
    const auto& je = j.at("ego");
    const std::string kind = je.value("script", "stationary");
    if (kind == "stationary") {
      scn.ego.kind = EgoScriptKind::stationary;
    } else if (kind == "constant_speed") {
      scn.ego.kind = EgoScriptKind::constant_speed;
    } else if (kind == "waypoints") {
      scn.ego.kind = EgoScriptKind::waypoints;
    } else {
      throw std::invalid_argument("unknown ego script kind: " + kind);
    }
    if (je.contains("start")) {
      scn.ego.start.position = {je.at("start").at(0).get<double>(),
                                je.at("start").at(1).get<double>()};
    }
    scn.ego.start.heading = je.value("heading", 0.0);
    scn.ego.speed = je.value("speed", 0.0);
    if (je.contains("waypoints")) {
      for (const auto& w : je.at("waypoints")) {
        scn.ego.waypoints.push_back(
            {{w.at(0).get<double>(), w.at(1).get<double>()}, w.at(2).get<double>()});
      }
    }
  }

  if (j.contains("actors")) {
    for (const auto& ja : j.at("actors")) {
      Actor actor;
      const auto cls = object_class_from_string(ja.value("class", "pedestrian"));
      if (!cls) throw std::invalid_argument("unknown actor class");
      actor.cls = *cls;
      actor.start = {ja.at("start").at(0).get<double>(), ja.at("start").at(1).get<double>()};
      actor.velocity = {ja.at("velocity").at(0).get<double>(),
                        ja.at("velocity").at(1).get<double>()};
      actor.t_start = ja.value("t_start", 0.0);
      actor.t_stop = ja.value("t_stop", std::numeric_limits<double>::infinity());
      scn.actors.push_back(actor);
    }
  }

  if (j.contains("camera")) scn.camera = camera_from_json(j.at("camera"));
  if (j.contains("noise")) scn.noise = noise_from_json(j.at("noise"));
  return scn;
}

nlohmann::ordered_json scenario_to_json(const Scenario& scn) {
  nlohmann::ordered_json j;
  j["name"] = scn.name;
  j["duration"] = scn.duration;
  j["seed"] = scn.seed;

  nlohmann::ordered_json je;
  je["script"] = script_kind_name(scn.ego.kind);
  je["start"] = {scn.ego.start.position.x, scn.ego.start.position.y};
  je["heading"] = scn.ego.start.heading;
  je["speed"] = scn.ego.speed;
  if (!scn.ego.waypoints.empty()) {
    je["waypoints"] = nlohmann::ordered_json::array();
    for (const EgoWaypoint& w : scn.ego.waypoints) {
      je["waypoints"].push_back({w.pos.x, w.pos.y, w.t});
    }
  }
  j["ego"] = je;

  j["actors"] = nlohmann::ordered_json::array();
  for (const Actor& actor : scn.actors) {
    nlohmann::ordered_json ja;
    ja["class"] = to_string(actor.cls);
    ja["start"] = {actor.start.x, actor.start.y};
    ja["velocity"] = {actor.velocity.x, actor.velocity.y};
    ja["t_start"] = actor.t_start;
    if (std::isfinite(actor.t_stop)) ja["t_stop"] = actor.t_stop;
    j["actors"].push_back(ja);
  }

  j["camera"] = camera_to_json(scn.camera);
  j["noise"] = noise_to_json(scn.noise);
  return j;
}

namespace {

// Crossing study from the camera pathology experiments: pedestrian walking
// +y at a fixed longitudinal distance, ego stationary or at 15 mph. For the
// stationary variants the pedestrian traverses the whole field of view; for
// the moving variants it starts inside the view cone and stays observable
// until the foot row leaves the image as the vehicle closes in.
Scenario figure_preset(const std::string& name, bool moving, double distance,
                       bool dropout) {
  Scenario scn;
  scn.name = name;
  scn.seed = 1;

  Actor ped;
  ped.cls = ObjectClass::pedestrian;
  ped.velocity = {0.0, 1.4};

  if (moving) {
    scn.ego.kind = EgoScriptKind::constant_speed;
    scn.ego.speed = 15.0 * kMphToMps;
    ped.start = {distance, -0.2 * distance};
    scn.duration = distance / scn.ego.speed + 2.0;
  } else {
    scn.ego.kind = EgoScriptKind::stationary;
    const double half_span = distance * std::tan(20.0 * M_PI / 180.0) + 1.0;
    ped.start = {distance, -half_span};
    scn.duration = 2.0 * half_span / 1.4;
  }
  scn.actors.push_back(ped);

  scn.camera.pixel_jitter_sigma = 2.0;
  scn.camera.quantize = true;
  if (dropout) {
    scn.camera.dropout_prob = 0.03;
    scn.camera.id_switch_prob = 0.7;
  }
  return scn;
}

// Constant-speed approach with a pedestrian on a collision course; the
// crossing is timed so the conflict persists from the first warning through
// the emergency threshold.
Scenario leadtime_preset() {
  Scenario scn;
  scn.name = "leadtime";
  scn.seed = 1;
  scn.duration = 13.0;
  scn.ego.kind = EgoScriptKind::constant_speed;
  scn.ego.speed = 15.0 * kMphToMps;

  Actor ped;
  ped.cls = ObjectClass::pedestrian;
  ped.start = {80.0, -6.0};
  ped.velocity = {0.0, 0.45};
  scn.actors.push_back(ped);

  scn.camera.pixel_jitter_sigma = 0.0;
  scn.camera.quantize = false;
  return scn;
}

// Pedestrian walking parallel to the road, 5 m off the corridor: any warning
// against this scenario is false by definition.
Scenario parallel_preset() {
  Scenario scn;
  scn.name = "parallel";
  scn.seed = 1;
  scn.duration = 10.0;
  scn.ego.kind = EgoScriptKind::constant_speed;
  scn.ego.speed = 15.0 * kMphToMps;

  Actor ped;
  ped.cls = ObjectClass::pedestrian;
  ped.start = {40.0, -5.0};
  ped.velocity = {1.3, 0.0};
  scn.actors.push_back(ped);

  scn.camera.pixel_jitter_sigma = 0.0;
  scn.camera.quantize = false;
  return scn;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig5", "fig6", "fig7", "fig8", "leadtime", "parallel"};
}

Scenario make_preset(const std::string& name) {
  if (name == "fig5") return figure_preset(name, false, 20.0, false);
  if (name == "fig6") return figure_preset(name, false, 40.0, false);
  if (name == "fig7") return figure_preset(name, true, 40.0, false);
  if (name == "fig8") return figure_preset(name, true, 40.0, true);
  if (name == "leadtime") return leadtime_preset();
  if (name == "parallel") return parallel_preset();
  throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace ewarn
