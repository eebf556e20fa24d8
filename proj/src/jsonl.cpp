#include "ewarn/jsonl.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ewarn {

namespace {

using ordered_json = nlohmann::ordered_json;

ObjectClass parse_class(const nlohmann::json& j) {
  const auto cls = object_class_from_string(j.get<std::string>());
  if (!cls) throw std::invalid_argument("unknown object class: " + j.get<std::string>());
  return *cls;
}

template <typename T>
std::vector<T> read_lines(const std::string& path,
                          const std::function<T(const std::string&)>& parse,
                          const char* what, bool enforce_order) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + " log: " + path);

  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  double prev_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    T rec;
    try {
      rec = parse(line);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": malformed " << what << " record: " << e.what();
      throw std::runtime_error(msg.str());
    }
    double t;
    if constexpr (std::is_same_v<T, EgoSensorRecord>) {
      t = record_time(rec);
    } else if constexpr (std::is_same_v<T, Warning>) {
      t = rec.t_issued;
    } else {
      t = rec.t;
    }
    if (enforce_order && t < prev_t - 1e-12) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": timestamp regression in " << what << " log ("
          << t << " after " << prev_t << ")";
      throw std::runtime_error(msg.str());
    }
    prev_t = t;
    out.push_back(std::move(rec));
  }
  return out;
}

template <typename T>
void write_lines(const std::string& path, const std::vector<T>& recs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const T& rec : recs) out << to_jsonl(rec) << '\n';
}

}  // namespace

std::string to_jsonl(const Detection& det) {
  ordered_json j;
  j["t"] = det.t;
  j["id"] = det.track_id;
  j["class"] = to_string(det.cls);
  j["x"] = det.pos_vehicle.x;
  j["y"] = det.pos_vehicle.y;
  return j.dump();
}

Detection detection_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  Detection det;
  det.t = j.at("t").get<double>();
  det.track_id = j.at("id").get<int>();
  det.cls = parse_class(j.at("class"));
  det.pos_vehicle = {j.at("x").get<double>(), j.at("y").get<double>()};
  return det;
}

std::string to_jsonl(const EgoSensorRecord& rec) {
  ordered_json j;
  if (const auto* imu = std::get_if<ImuSample>(&rec)) {
    j["t"] = imu->t;
    j["kind"] = "imu";
    j["gyro"] = {imu->gyro[0], imu->gyro[1], imu->gyro[2]};
    j["accel"] = {imu->accel[0], imu->accel[1], imu->accel[2]};
  } else if (const auto* wheel = std::get_if<WheelSample>(&rec)) {
    j["t"] = wheel->t;
    j["kind"] = "wheel";
    j["speed"] = wheel->speed;
  } else {
    const auto& gps = std::get<GpsFix>(rec);
    j["t"] = gps.t;
    j["kind"] = "gps";
    j["pos"] = {gps.pos.x, gps.pos.y};
    j["sigma_pos"] = gps.sigma_pos;
  }
  return j.dump();
}

EgoSensorRecord ego_record_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "imu") {
    ImuSample imu;
    imu.t = j.at("t").get<double>();
    const auto& g = j.at("gyro");
    const auto& a = j.at("accel");
    imu.gyro = {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()};
    imu.accel = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    return imu;
  }
  if (kind == "wheel") {
    WheelSample wheel;
    wheel.t = j.at("t").get<double>();
    wheel.speed = j.at("speed").get<double>();
    return wheel;
  }
  if (kind == "gps") {
    GpsFix gps;
    gps.t = j.at("t").get<double>();
    gps.pos = {j.at("pos").at(0).get<double>(), j.at("pos").at(1).get<double>()};
    gps.sigma_pos = j.at("sigma_pos").get<double>();
    return gps;
  }
  throw std::invalid_argument("unknown ego record kind: " + kind);
}

std::string to_jsonl(const TruthSample& sample) {
  ordered_json j;
  j["t"] = sample.t;
  j["id"] = sample.id;
  j["x"] = sample.pos.x;
  j["y"] = sample.pos.y;
  return j.dump();
}

TruthSample truth_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  TruthSample sample;
  sample.t = j.at("t").get<double>();
  sample.id = j.at("id").get<int>();
  sample.pos = {j.at("x").get<double>(), j.at("y").get<double>()};
  return sample;
}

std::string to_jsonl(const Warning& warning) {
  ordered_json j;
  j["t"] = warning.t_issued;
  j["id"] = warning.track_id;
  j["class"] = to_string(warning.cls);
  j["severity"] = to_string(warning.severity);
  j["direction"] = to_string(warning.direction);
  j["utterance"] = warning.utterance;
  j["t_veh"] = warning.conflict.t_veh;
  j["s"] = warning.conflict.s_intercept;
  return j.dump();
}

Warning warning_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  Warning w;
  w.t_issued = j.at("t").get<double>();
  w.track_id = j.at("id").get<int>();
  w.cls = parse_class(j.at("class"));
  const std::string sev = j.at("severity").get<std::string>();
  if (sev == "early") {
    w.severity = Severity::early;
  } else if (sev == "emergency") {
    w.severity = Severity::emergency;
  } else {
    throw std::invalid_argument("unknown severity: " + sev);
  }
  const std::string dir = j.at("direction").get<std::string>();
  if (dir == "left") {
    w.direction = Direction::left;
  } else if (dir == "ahead") {
    w.direction = Direction::ahead;
  } else if (dir == "right") {
    w.direction = Direction::right;
  } else {
    throw std::invalid_argument("unknown direction: " + dir);
  }
  w.utterance = j.at("utterance").get<std::string>();
  w.conflict.t_veh = j.at("t_veh").get<double>();
  w.conflict.s_intercept = j.at("s").get<double>();
  w.conflict.track_id = w.track_id;
  return w;
}

void write_detections(const std::string& path, const std::vector<Detection>& dets) {
  write_lines(path, dets);
}
void write_ego_log(const std::string& path, const std::vector<EgoSensorRecord>& recs) {
  write_lines(path, recs);
}
void write_truth(const std::string& path, const std::vector<TruthSample>& samples) {
  write_lines(path, samples);
}
void write_warnings(const std::string& path, const std::vector<Warning>& warnings) {
  write_lines(path, warnings);
}

std::vector<Detection> read_detections(const std::string& path) {
  return read_lines<Detection>(path, detection_from_jsonl, "detection", true);
}
std::vector<EgoSensorRecord> read_ego_log(const std::string& path) {
  return read_lines<EgoSensorRecord>(path, ego_record_from_jsonl, "ego", true);
}
std::vector<TruthSample> read_truth(const std::string& path) {
  return read_lines<TruthSample>(path, truth_from_jsonl, "truth", true);
}
std::vector<Warning> read_warnings(const std::string& path) {
  return read_lines<Warning>(path, warning_from_jsonl, "warning", true);
}

}  // namespace ewarn
