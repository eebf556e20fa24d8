#include "ewarn/config.hpp"

#include <fstream>
#include <stdexcept>

namespace ewarn {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json ekf_to_json(const EkfConfig& c) {
  ordered_json j;
  j["sigma_gyro"] = c.sigma_gyro;
  j["sigma_accel"] = c.sigma_accel;
  j["sigma_wheel"] = c.sigma_wheel;
  j["sigma_gps"] = c.sigma_gps;
  j["gps_rate_hz"] = c.gps_rate_hz;
  j["sigma_pos_process"] = c.sigma_pos_process;
  j["sigma_pitchroll_process"] = c.sigma_pitchroll_process;
  j["init_sigma_pos"] = c.init_sigma_pos;
  j["init_sigma_yaw"] = c.init_sigma_yaw;
  j["init_sigma_pitchroll"] = c.init_sigma_pitchroll;
  j["init_sigma_speed"] = c.init_sigma_speed;
  j["out_of_order_tolerance"] = c.out_of_order_tolerance;
  j["validate_covariance"] = c.validate_covariance;
  return j;
}

EkfConfig ekf_from_json(const nlohmann::json& j) {
  EkfConfig c;
  c.sigma_gyro = j.value("sigma_gyro", c.sigma_gyro);
  c.sigma_accel = j.value("sigma_accel", c.sigma_accel);
  c.sigma_wheel = j.value("sigma_wheel", c.sigma_wheel);
  c.sigma_gps = j.value("sigma_gps", c.sigma_gps);
  c.gps_rate_hz = j.value("gps_rate_hz", c.gps_rate_hz);
  c.sigma_pos_process = j.value("sigma_pos_process", c.sigma_pos_process);
  c.sigma_pitchroll_process = j.value("sigma_pitchroll_process", c.sigma_pitchroll_process);
  c.init_sigma_pos = j.value("init_sigma_pos", c.init_sigma_pos);
  c.init_sigma_yaw = j.value("init_sigma_yaw", c.init_sigma_yaw);
  c.init_sigma_pitchroll = j.value("init_sigma_pitchroll", c.init_sigma_pitchroll);
  c.init_sigma_speed = j.value("init_sigma_speed", c.init_sigma_speed);
  c.out_of_order_tolerance = j.value("out_of_order_tolerance", c.out_of_order_tolerance);
  c.validate_covariance = j.value("validate_covariance", c.validate_covariance);
  return c;
}

ordered_json tracking_to_json(const TrackerConfig& c) {
  ordered_json j;
  j["t_miss"] = c.t_miss;
  j["ghost_max"] = c.ghost_max;
  j["r_gate"] = c.r_gate;
  j["v_max"] = c.v_max;
  j["merge_enabled"] = c.merge_enabled;
  j["buffer_cap"] = c.buffer_cap;
  return j;
}

TrackerConfig tracking_from_json(const nlohmann::json& j) {
  TrackerConfig c;
  c.t_miss = j.value("t_miss", c.t_miss);
  c.ghost_max = j.value("ghost_max", c.ghost_max);
  c.r_gate = j.value("r_gate", c.r_gate);
  c.v_max = j.value("v_max", c.v_max);
  c.merge_enabled = j.value("merge_enabled", c.merge_enabled);
  c.buffer_cap = j.value("buffer_cap", c.buffer_cap);
  return c;
}

ordered_json prediction_to_json(const FitConfig& c) {
  ordered_json j;
  j["window"] = c.window;
  j["min_lat_samples"] = c.min_lat_samples;
  j["min_long_samples"] = c.min_long_samples;
  j["v_max"] = c.v_max;
  return j;
}

FitConfig prediction_from_json(const nlohmann::json& j) {
  FitConfig c;
  c.window = j.value("window", c.window);
  c.min_lat_samples = j.value("min_lat_samples", c.min_lat_samples);
  c.min_long_samples = j.value("min_long_samples", c.min_long_samples);
  c.v_max = j.value("v_max", c.v_max);
  return c;
}

ordered_json warning_to_json(const WarningConfig& c) {
  ordered_json j;
  j["corridor_halfwidth"] = c.corridor_halfwidth;
  j["horizon"] = c.horizon;
  j["sample_dt"] = c.sample_dt;
  j["speed_floor"] = c.speed_floor;
  j["t_warn"] = c.t_warn;
  j["s_max"] = c.s_max;
  j["overlap_tau"] = c.overlap_tau;
  j["t_emergency"] = c.t_emergency;
  j["prompt_duration"] = c.prompt_duration;
  j["ahead_halfwidth"] = c.ahead_halfwidth;
  j["rate_limit_period"] = c.rate_limit_period;
  j["maneuver_merge_window"] = c.maneuver_merge_window;
  return j;
}

WarningConfig warning_from_json(const nlohmann::json& j) {
  WarningConfig c;
  c.corridor_halfwidth = j.value("corridor_halfwidth", c.corridor_halfwidth);
  c.horizon = j.value("horizon", c.horizon);
  c.sample_dt = j.value("sample_dt", c.sample_dt);
  c.speed_floor = j.value("speed_floor", c.speed_floor);
  c.t_warn = j.value("t_warn", c.t_warn);
  c.s_max = j.value("s_max", c.s_max);
  c.overlap_tau = j.value("overlap_tau", c.overlap_tau);
  c.t_emergency = j.value("t_emergency", c.t_emergency);
  c.prompt_duration = j.value("prompt_duration", c.prompt_duration);
  c.ahead_halfwidth = j.value("ahead_halfwidth", c.ahead_halfwidth);
  c.rate_limit_period = j.value("rate_limit_period", c.rate_limit_period);
  c.maneuver_merge_window = j.value("maneuver_merge_window", c.maneuver_merge_window);
  return c;
}

// Radians on the wire: a degree conversion would not round-trip bit-exactly.
ordered_json deviation_to_json(const DeviationConfig& c) {
  ordered_json j;
  j["max_cross_track"] = c.max_cross_track;
  j["max_heading_error_rad"] = c.max_heading_error;
  return j;
}

DeviationConfig deviation_from_json(const nlohmann::json& j) {
  DeviationConfig c;
  c.max_cross_track = j.value("max_cross_track", c.max_cross_track);
  c.max_heading_error = j.value("max_heading_error_rad", c.max_heading_error);
  return c;
}

const char* provider_name(RouteProviderKind kind) {
  switch (kind) {
    case RouteProviderKind::line: return "line";
    case RouteProviderKind::file: return "file";
    case RouteProviderKind::http: return "http";
  }
  return "line";
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  if (j.contains("ekf")) cfg.ekf = ekf_from_json(j.at("ekf"));
  if (j.contains("tracking")) cfg.tracking = tracking_from_json(j.at("tracking"));
  if (j.contains("prediction")) cfg.prediction = prediction_from_json(j.at("prediction"));
  if (j.contains("warning")) cfg.warning = warning_from_json(j.at("warning"));
  if (j.contains("deviation")) cfg.deviation = deviation_from_json(j.at("deviation"));
  if (j.contains("camera")) {
    // Reuse the scenario schema for the camera block.
    cfg.camera = scenario_from_json(nlohmann::json{{"camera", j.at("camera")}}).camera;
  }
  if (j.contains("noise")) {
    cfg.noise = scenario_from_json(nlohmann::json{{"noise", j.at("noise")}}).noise;
  }
  cfg.initial_yaw = j.value("initial_yaw", cfg.initial_yaw);

  if (j.contains("route")) {
    const auto& jr = j.at("route");
    const std::string provider = jr.value("provider", "line");
    if (provider == "line") {
      cfg.route_provider = RouteProviderKind::line;
    } else if (provider == "file") {
      cfg.route_provider = RouteProviderKind::file;
    } else if (provider == "http") {
      cfg.route_provider = RouteProviderKind::http;
    } else {
      throw std::invalid_argument("unknown route provider: " + provider);
    }
    cfg.route_file = jr.value("file", cfg.route_file);
    cfg.route_url = jr.value("url", cfg.route_url);
    if (jr.contains("dest")) {
      cfg.route_dest = {jr.at("dest").at(0).get<double>(), jr.at("dest").at(1).get<double>()};
    }
  }
  return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["ekf"] = ekf_to_json(cfg.ekf);
  j["tracking"] = tracking_to_json(cfg.tracking);
  j["prediction"] = prediction_to_json(cfg.prediction);
  j["warning"] = warning_to_json(cfg.warning);
  j["deviation"] = deviation_to_json(cfg.deviation);
  j["camera"] = scenario_to_json(Scenario{.camera = cfg.camera}).at("camera");
  j["noise"] = scenario_to_json(Scenario{.noise = cfg.noise}).at("noise");
  j["initial_yaw"] = cfg.initial_yaw;

  ordered_json jr;
  jr["provider"] = provider_name(cfg.route_provider);
  jr["file"] = cfg.route_file;
  jr["url"] = cfg.route_url;
  jr["dest"] = {cfg.route_dest.x, cfg.route_dest.y};
  j["route"] = jr;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

void save_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace ewarn
