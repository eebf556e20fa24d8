#include "ewarn/conflict.hpp"

#include <cmath>
#include <stdexcept>

namespace ewarn {

std::optional<Conflict> find_interception(const TrajectoryFit& fit, int track_id,
                                          const RoutePath& route, const RouteFix& ego_fix,
                                          double ego_speed, Timestamp now,
                                          const FrameSet& frames, const WarningConfig& cfg) {
  if (!fit.lat_valid) throw std::invalid_argument("find_interception: invalid fit");
  if (fit.speed_gate_failed) return std::nullopt;
  if (ego_speed < cfg.speed_floor) return std::nullopt;

  const int steps = static_cast<int>(std::round(cfg.horizon / cfg.sample_dt));

  // First contiguous run of predicted samples inside the corridor, ahead of
  // the ego's arc position.
  int run_start = -1, run_end = -1;
  for (int k = 0; k <= steps; ++k) {
    const double tau = k * cfg.sample_dt;
    const Vec2 p_world = from_analysis(predict_position(fit, now + tau), frames);
    const RouteProjection proj = project_point(p_world, route);
    const bool inside =
        proj.distance <= cfg.corridor_halfwidth && proj.s > ego_fix.s;
    if (inside) {
      if (run_start < 0) run_start = k;
      run_end = k;
    } else if (run_start >= 0) {
      break;
    }
  }
  if (run_start < 0) return std::nullopt;

  const double t_enter = run_start * cfg.sample_dt;
  const double t_exit = run_end * cfg.sample_dt;
  const double t_mid = 0.5 * (t_enter + t_exit);

  const Vec2 p_mid = from_analysis(predict_position(fit, now + t_mid), frames);
  const RouteProjection mid_proj = project_point(p_mid, route);

  Conflict conflict;
  conflict.track_id = track_id;
  conflict.point_world = mid_proj.point;
  conflict.s_intercept = mid_proj.s - ego_fix.s;
  conflict.t_veh = conflict.s_intercept / std::max(ego_speed, cfg.speed_floor);
  conflict.t_ped_enter = t_enter;
  conflict.t_ped_exit = t_exit;
  return conflict;
}

Direction direction_word(const TrajectoryFit& fit, Timestamp now, const Pose2& ego,
                         const FrameSet& frames, const WarningConfig& cfg) {
  if (!fit.lat_valid) throw std::invalid_argument("direction_word: invalid fit");
  const Vec2 p_world = from_analysis(predict_position(fit, now + cfg.prompt_duration), frames);
  const double y = world_to_vehicle(p_world, ego).y;
  if (y > cfg.ahead_halfwidth) return Direction::left;
  if (y < -cfg.ahead_halfwidth) return Direction::right;
  return Direction::ahead;
}

std::optional<Warning> decide_warning(const Conflict& conflict, const TrajectoryFit& fit,
                                      ObjectClass cls, Timestamp now, const Pose2& ego,
                                      const FrameSet& frames, const WarningConfig& cfg) {
  if (!(conflict.t_veh < cfg.t_warn)) return std::nullopt;
  if (!(conflict.s_intercept <= cfg.s_max)) return std::nullopt;

  // The pedestrian must occupy the corridor around the vehicle's arrival.
  const double lo = conflict.t_veh - cfg.overlap_tau;
  const double hi = conflict.t_veh + cfg.overlap_tau;
  if (conflict.t_ped_exit < lo || conflict.t_ped_enter > hi) return std::nullopt;

  Warning warning;
  warning.t_issued = now;
  warning.track_id = conflict.track_id;
  warning.cls = cls;
  warning.severity =
      conflict.t_veh < cfg.t_emergency ? Severity::emergency : Severity::early;
  warning.direction = direction_word(fit, now, ego, frames, cfg);
  warning.conflict = conflict;
  return warning;
}

std::string compose_utterance(const Warning& warning,
                              const std::optional<Maneuver>& pending_maneuver) {
  const std::string cls = to_string(warning.cls);
  const std::string dir = to_string(warning.direction);

  if (pending_maneuver.has_value()) {
    if (warning.direction == Direction::ahead) {
      return pending_maneuver->text + " and watch out for " + cls + " ahead";
    }
    return pending_maneuver->text + " and watch out for " + cls + " on your " + dir;
  }
  if (warning.direction == Direction::ahead) {
    return "Watch out for the " + cls + " ahead";
  }
  return "Watch out for the " + cls + " on the " + dir;
}

std::optional<Warning> WarningEngine::process(const Conflict& conflict,
                                              const TrajectoryFit& fit, ObjectClass cls,
                                              Timestamp now, const Pose2& ego,
                                              const FrameSet& frames,
                                              const std::optional<Maneuver>& pending_maneuver) {
  std::optional<Warning> warning =
      decide_warning(conflict, fit, cls, now, ego, frames, cfg_);
  if (!warning) return std::nullopt;

  const auto it = last_issued_.find(warning->track_id);
  if (it != last_issued_.end()) {
    const bool escalated = warning->severity == Severity::emergency &&
                           it->second.severity == Severity::early;
    const bool window_open = now - it->second.t >= cfg_.rate_limit_period;
    if (!escalated && !window_open) return std::nullopt;
  }
  last_issued_[warning->track_id] = {now, warning->severity};

  warning->utterance = compose_utterance(*warning, pending_maneuver);
  return warning;
}

}  // namespace ewarn
