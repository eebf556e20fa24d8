#include "ewarn/tracking.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ewarn {

void TrackStore::ingest(const Detection& det, const VehicleState& ego,
                        const FrameSet& frames) {
  const int id = resolve_alias(det.track_id);
  auto it = tracks_.find(id);
  if (it == tracks_.end()) {
    PedTrack track;
    track.id = det.track_id;
    track.cls = det.cls;
    append_sample(track, det, ego, frames);
    tracks_.emplace(det.track_id, std::move(track));
    alias_.emplace(det.track_id, det.track_id);
    return;
  }
  append_sample(it->second, det, ego, frames);
}

void TrackStore::append_sample(PedTrack& track, const Detection& det,
                               const VehicleState& ego, const FrameSet& frames) {
  const Vec2 world = to_world_checked(det, ego.pose, ego.t);
  const Vec2 analysis = to_analysis(world, frames);
  if (!track.samples.empty() &&
      det.t <= track.samples.back().t + 1e-12) {
    if (std::abs(det.t - track.samples.back().t) < 1e-12) {
      std::ostringstream msg;
      msg << "duplicate sample for track " << track.id << " at t=" << det.t;
      throw std::invalid_argument(msg.str());
    }
    std::ostringstream msg;
    msg << "out-of-order sample for track " << track.id << ": t=" << det.t
        << " after t=" << track.samples.back().t;
    throw std::invalid_argument(msg.str());
  }
  track.samples.push_back({det.t, analysis});
  if (track.samples.size() > cfg_.buffer_cap) {
    track.samples.erase(track.samples.begin(),
                        track.samples.begin() + (track.samples.size() - cfg_.buffer_cap));
  }
  track.last_seen = det.t;
  track.status = TrackStatus::active;
}

void TrackStore::tick(Timestamp now, const std::unordered_set<int>& tracks_with_valid_fit) {
  for (auto& [id, track] : tracks_) {
    const double gap = now - track.last_seen;
    switch (track.status) {
      case TrackStatus::active:
        if (gap > cfg_.t_miss) {
          if (tracks_with_valid_fit.count(id) > 0 && gap <= cfg_.ghost_max) {
            track.status = TrackStatus::ghost;
          } else {
            track.status = TrackStatus::dead;
          }
        }
        break;
      case TrackStatus::ghost:
        if (gap > cfg_.ghost_max) track.status = TrackStatus::dead;
        break;
      case TrackStatus::dead:
        break;
    }
  }
}

std::optional<int> TrackStore::reassociate(const Detection& det, const VehicleState& ego,
                                           const FrameSet& frames,
                                           const std::map<int, Vec2>& predicted) const {
  if (!cfg_.merge_enabled) return std::nullopt;

  const Vec2 analysis = to_analysis(to_world_checked(det, ego.pose, ego.t), frames);

  std::optional<int> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [id, track] : tracks_) {
    if (track.status != TrackStatus::ghost) continue;
    if (track.cls != det.cls) continue;
    const auto pred = predicted.find(id);
    if (pred == predicted.end()) continue;

    const double dist = (pred->second - analysis).norm();
    if (dist > cfg_.r_gate) continue;

    const double gap = det.t - track.last_seen;
    if (gap <= 0.0) continue;
    const double implied_speed = (analysis - track.samples.back().pos).norm() / gap;
    if (implied_speed > cfg_.v_max) continue;

    if (dist < best_dist) {
      best_dist = dist;
      best = id;
    }
  }
  return best;
}

void TrackStore::merge_into(int track_id, const Detection& det, const VehicleState& ego,
                            const FrameSet& frames) {
  auto it = tracks_.find(track_id);
  if (it == tracks_.end()) throw std::invalid_argument("merge_into: unknown track id");
  if (alias_.count(det.track_id) > 0) {
    throw std::invalid_argument("merge_into: camera id already owned by a track");
  }
  append_sample(it->second, det, ego, frames);
  it->second.merged_ids.push_back(det.track_id);
  alias_.emplace(det.track_id, track_id);
}

int TrackStore::resolve_alias(int camera_id) const {
  const auto it = alias_.find(camera_id);
  return it == alias_.end() ? camera_id : it->second;
}

bool TrackStore::known(int camera_id) const { return alias_.count(camera_id) > 0; }

const PedTrack* TrackStore::find(int track_id) const {
  const auto it = tracks_.find(track_id);
  return it == tracks_.end() ? nullptr : &it->second;
}

}  // namespace ewarn
