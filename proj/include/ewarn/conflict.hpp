#pragma once

#include <map>
#include <optional>
#include <string>

#include "ewarn/geometry.hpp"
#include "ewarn/prediction.hpp"
#include "ewarn/route.hpp"

namespace ewarn {

// Where and when a predicted trajectory meets the route corridor.
// Pedestrian times are relative to `now`; t_veh is the vehicle's travel time
// to the interception arc position at its current speed.
struct Conflict {
  int track_id = 0;
  Vec2 point_world;          // interception point on the route
  double s_intercept = 0.0;  // arc length ahead of the ego projection, m
  double t_veh = 0.0;        // s
  double t_ped_enter = 0.0;  // s, corridor occupancy window start
  double t_ped_exit = 0.0;   // s
};

enum class Severity { early, emergency };
enum class Direction { left, ahead, right };

inline const char* to_string(Severity s) {
  return s == Severity::emergency ? "emergency" : "early";
}

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::left: return "left";
    case Direction::ahead: return "ahead";
    case Direction::right: return "right";
  }
  return "ahead";
}

struct Warning {
  Timestamp t_issued = 0.0;
  int track_id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  Severity severity = Severity::early;
  Direction direction = Direction::ahead;
  std::string utterance;
  Conflict conflict;
};

struct WarningConfig {
  double corridor_halfwidth = 1.5;  // m, swept vehicle path around the route
  double horizon = 8.0;             // s of trajectory extrapolation
  double sample_dt = 0.1;           // s, corridor sampling step
  double speed_floor = 0.5;         // m/s; below it the ego is not approaching
  double t_warn = 4.0;              // s, warn when t_veh is below this
  double s_max = 60.0;              // m, and the interception is at most this far
  double overlap_tau = 1.5;         // s, pedestrian/vehicle co-occupancy tolerance
  double t_emergency = 1.0;         // s, emergency severity threshold
  double prompt_duration = 1.0;     // s it takes to hear the warning prompt
  double ahead_halfwidth = 1.75;    // m, |lateral| band mapped to "ahead"
  double rate_limit_period = 10.0;  // s between repeated warnings per track
  double maneuver_merge_window = 2.0;  // s; maneuvers due sooner merge into the prompt
};

// Scans the predicted trajectory over the horizon for the first contiguous
// interval inside the route corridor ahead of the ego. Returns nothing when
// the path never enters the corridor or the ego is below the speed floor.
// Fits that failed the speed gate never produce a conflict; throws on fits
// without a valid lateral axis.
std::optional<Conflict> find_interception(const TrajectoryFit& fit, int track_id,
                                          const RoutePath& route, const RouteFix& ego_fix,
                                          double ego_speed, Timestamp now,
                                          const FrameSet& frames,
                                          const WarningConfig& cfg = {});

// Directional word from the predicted position once the prompt has been
// heard, evaluated in the current vehicle frame.
Direction direction_word(const TrajectoryFit& fit, Timestamp now, const Pose2& ego,
                         const FrameSet& frames, const WarningConfig& cfg = {});

// Pure warning decision: the 4 s / 60 m rule plus the occupancy overlap
// check. No rate limiting; the utterance is left empty.
std::optional<Warning> decide_warning(const Conflict& conflict, const TrajectoryFit& fit,
                                      ObjectClass cls, Timestamp now, const Pose2& ego,
                                      const FrameSet& frames, const WarningConfig& cfg = {});

std::string compose_utterance(const Warning& warning,
                              const std::optional<Maneuver>& pending_maneuver);

// Stateful wrapper applying the per-track rate limit (one warning per
// rate_limit_period unless the severity escalates) and composing the final
// utterance. Owned by the single pipeline writer.
class WarningEngine {
 public:
  explicit WarningEngine(WarningConfig cfg = {}) : cfg_(cfg) {}

  const WarningConfig& config() const { return cfg_; }

  std::optional<Warning> process(const Conflict& conflict, const TrajectoryFit& fit,
                                 ObjectClass cls, Timestamp now, const Pose2& ego,
                                 const FrameSet& frames,
                                 const std::optional<Maneuver>& pending_maneuver = {});

 private:
  struct Issued {
    Timestamp t = 0.0;
    Severity severity = Severity::early;
  };

  WarningConfig cfg_;
  std::map<int, Issued> last_issued_;
};

}  // namespace ewarn
