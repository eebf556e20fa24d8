#pragma once

#include <string>
#include <vector>

#include "ewarn/conflict.hpp"
#include "ewarn/ekf.hpp"
#include "ewarn/scenario.hpp"

namespace ewarn {

// JSON Lines serialization for every log the pipeline reads or writes.
// Formats:
//   detections: {"t":f,"id":i,"class":s,"x":f,"y":f}           (vehicle frame)
//   ego:        {"t":f,"kind":"imu","gyro":[..],"accel":[..]}
//               {"t":f,"kind":"wheel","speed":f}
//               {"t":f,"kind":"gps","pos":[x,y],"sigma_pos":f}
//   truth:      {"t":f,"id":i,"x":f,"y":f}                     (world frame, ego=0)
//   warnings:   {"t":f,"id":i,"class":s,"severity":s,"direction":s,
//                "utterance":s,"t_veh":f,"s":f}

std::string to_jsonl(const Detection& det);
std::string to_jsonl(const EgoSensorRecord& rec);
std::string to_jsonl(const TruthSample& sample);
std::string to_jsonl(const Warning& warning);

Detection detection_from_jsonl(const std::string& line);
EgoSensorRecord ego_record_from_jsonl(const std::string& line);
TruthSample truth_from_jsonl(const std::string& line);
Warning warning_from_jsonl(const std::string& line);

// Whole-file helpers. Readers enforce per-stream non-decreasing timestamps
// and report malformed lines with their line number.
void write_detections(const std::string& path, const std::vector<Detection>& dets);
void write_ego_log(const std::string& path, const std::vector<EgoSensorRecord>& recs);
void write_truth(const std::string& path, const std::vector<TruthSample>& samples);
void write_warnings(const std::string& path, const std::vector<Warning>& warnings);

std::vector<Detection> read_detections(const std::string& path);
std::vector<EgoSensorRecord> read_ego_log(const std::string& path);
std::vector<TruthSample> read_truth(const std::string& path);
std::vector<Warning> read_warnings(const std::string& path);

}  // namespace ewarn
