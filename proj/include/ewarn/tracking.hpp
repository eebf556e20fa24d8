#pragma once

#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ewarn/ekf.hpp"
#include "ewarn/geometry.hpp"

namespace ewarn {

enum class TrackStatus { active, ghost, dead };

inline const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::active: return "active";
    case TrackStatus::ghost: return "ghost";
    case TrackStatus::dead: return "dead";
  }
  return "dead";
}

struct TrackSample {
  Timestamp t = 0.0;
  Vec2 pos;  // analysis frame
};

struct PedTrack {
  int id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  std::vector<TrackSample> samples;  // strictly increasing in time
  Timestamp last_seen = 0.0;
  TrackStatus status = TrackStatus::active;
  std::vector<int> merged_ids;  // camera ids folded into this track
};

struct TrackerConfig {
  double t_miss = 0.2;     // s without detections before a track ghosts
  double ghost_max = 4.0;  // s of trajectory extrapolation after last detection
  double r_gate = 2.0;     // m, re-association gate on the predicted position
  double v_max = 3.5;      // m/s, jogging pace; faster implied merges are rejected
  bool merge_enabled = true;
  std::size_t buffer_cap = 360;  // samples (~10 s at 36 Hz)
};

// Per-object sample buffers in the analysis frame. Single-owner: the pipeline
// feeds it sequentially; snapshots handed out are values.
class TrackStore {
 public:
  explicit TrackStore(TrackerConfig cfg = {}) : cfg_(cfg) {}

  const TrackerConfig& config() const { return cfg_; }

  // Transforms the detection into the analysis frame and appends it to the
  // track owning det.track_id (following merge aliases). Unknown ids create a
  // new active track. Throws StaleEgoError when the ego snapshot is older
  // than one camera period, std::invalid_argument on duplicate (id, t).
  void ingest(const Detection& det, const VehicleState& ego, const FrameSet& frames);

  // Lifecycle sweep at time `now`. Tracks with a usable trajectory fit ghost
  // for up to ghost_max seconds after their last detection; tracks without
  // one die as soon as the miss gate expires.
  void tick(Timestamp now, const std::unordered_set<int>& tracks_with_valid_fit);

  // For an unknown camera id, finds the ghost whose predicted position (in
  // the analysis frame) gates with the detection. Absence is a valid outcome.
  std::optional<int> reassociate(const Detection& det, const VehicleState& ego,
                                 const FrameSet& frames,
                                 const std::map<int, Vec2>& predicted) const;

  // Folds the detection's camera id into an existing ghost track.
  void merge_into(int track_id, const Detection& det, const VehicleState& ego,
                  const FrameSet& frames);

  // Track id owning a camera id, following merges. Identity when unknown.
  int resolve_alias(int camera_id) const;
  bool known(int camera_id) const;

  const std::map<int, PedTrack>& tracks() const { return tracks_; }
  const PedTrack* find(int track_id) const;

 private:
  void append_sample(PedTrack& track, const Detection& det, const VehicleState& ego,
                     const FrameSet& frames);

  TrackerConfig cfg_;
  std::map<int, PedTrack> tracks_;
  std::unordered_map<int, int> alias_;  // camera id -> owning track id
};

}  // namespace ewarn
