#include "ewarn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "ewarn/ekf.hpp"
#include "ewarn/prediction.hpp"
#include "ewarn/tracking.hpp"

namespace ewarn {

namespace {

std::optional<Maneuver> pending_maneuver(const RoutePath& route, const RouteFix& fix,
                                         double speed, const WarningConfig& cfg) {
  if (speed < cfg.speed_floor) return std::nullopt;
  for (const Maneuver& m : route.maneuvers) {
    const double t_to = (m.s - fix.s) / speed;
    // Already playing, or due soon enough that the prompts would collide.
    if (t_to >= -cfg.prompt_duration && t_to <= cfg.maneuver_merge_window) return m;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Warning> run_pipeline(const RunConfig& cfg,
                                  const std::vector<Detection>& detections,
                                  const std::vector<EgoSensorRecord>& ego_log,
                                  const RoutePath& route, const RerouteFn& reroute) {
  std::vector<Warning> warnings;
  if (ego_log.empty() && detections.empty()) return warnings;

  VehicleState init;
  init.pose.heading = cfg.initial_yaw;
  EgoEkf ekf(cfg.ekf, init);
  const FrameSet frames = FrameSet::from_initial_heading(cfg.initial_yaw);
  TrackStore store(cfg.tracking);
  WarningEngine engine(cfg.warning);
  RoutePath active_route = route;

  const double frame_dt = cfg.camera.frame_dt();
  double t0 = std::numeric_limits<double>::infinity();
  double t_end = -std::numeric_limits<double>::infinity();
  if (!ego_log.empty()) {
    t0 = std::min(t0, record_time(ego_log.front()));
    t_end = std::max(t_end, record_time(ego_log.back()));
  }
  if (!detections.empty()) {
    t0 = std::min(t0, detections.front().t);
    t_end = std::max(t_end, detections.back().t);
  }

  std::size_t ego_i = 0;
  std::size_t det_i = 0;
  const double eps = 1e-9;

  const int n_frames = static_cast<int>(std::floor((t_end - t0) / frame_dt + eps)) + 1;
  for (int k = 0; k < n_frames; ++k) {
    const double t_frame = t0 + k * frame_dt;

    // Advance fusion through every sensor record due by this frame.
    for (; ego_i < ego_log.size() && record_time(ego_log[ego_i]) <= t_frame + eps; ++ego_i) {
      std::visit(
          [&](const auto& rec) {
            using T = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<T, ImuSample>) {
              ekf.predict(rec);
            } else {
              ekf.update(rec);
            }
          },
          ego_log[ego_i]);
    }
    const VehicleState ego = ekf.state();

    // Routing runs outside the per-frame hot path in spirit: the route only
    // swaps as a whole value between frames.
    RouteFix ego_fix = project(ego.pose, active_route);
    if (check_deviation(ego_fix, cfg.deviation) == RouteStatus::deviated && reroute) {
      if (std::optional<RoutePath> fresh = reroute(ego.pose)) {
        active_route = std::move(*fresh);
        ego_fix = project(ego.pose, active_route);
      }
    }

    // Ingest this frame's detections, re-associating unknown ids against
    // ghost predictions first.
    for (; det_i < detections.size() && detections[det_i].t <= t_frame + eps; ++det_i) {
      const Detection& det = detections[det_i];
      if (!store.known(det.track_id)) {
        std::map<int, Vec2> predicted;
        for (const auto& [id, track] : store.tracks()) {
          if (track.status != TrackStatus::ghost || track.samples.size() < 2) continue;
          const TrajectoryFit fit = fit_track(track, cfg.prediction);
          if (!fit.lat_valid) continue;
          predicted.emplace(id, predict_position(fit, det.t));
        }
        if (const auto ghost_id = store.reassociate(det, ego, frames, predicted)) {
          store.merge_into(*ghost_id, det, ego, frames);
          continue;
        }
      }
      store.ingest(det, ego, frames);
    }

    // Fit every live track, sweep lifecycles, then check conflicts.
    std::map<int, TrajectoryFit> fits;
    std::unordered_set<int> valid_fit_ids;
    for (const auto& [id, track] : store.tracks()) {
      if (track.status == TrackStatus::dead || track.samples.size() < 2) continue;
      const TrajectoryFit fit = fit_track(track, cfg.prediction);
      fits.emplace(id, fit);
      if (fit.lat_valid) valid_fit_ids.insert(id);
    }
    store.tick(t_frame, valid_fit_ids);

    for (const auto& [id, track] : store.tracks()) {
      if (track.status == TrackStatus::dead) continue;
      const auto fit_it = fits.find(id);
      if (fit_it == fits.end() || !fit_it->second.usable_for_warnings()) continue;

      const auto conflict =
          find_interception(fit_it->second, id, active_route, ego_fix, ego.speed,
                            t_frame, frames, cfg.warning);
      if (!conflict) continue;

      const auto maneuver = pending_maneuver(active_route, ego_fix, ego.speed, cfg.warning);
      if (auto warning = engine.process(*conflict, fit_it->second, track.cls, t_frame,
                                        ego.pose, frames, maneuver)) {
        warnings.push_back(std::move(*warning));
      }
    }
  }
  return warnings;
}

namespace {

struct TruthSeries {
  std::vector<Timestamp> t;
  std::vector<Vec2> pos;

  Vec2 at(Timestamp when) const {
    if (t.empty()) return {};
    if (when <= t.front()) return pos.front();
    if (when >= t.back()) return pos.back();
    const auto it = std::lower_bound(t.begin(), t.end(), when);
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    const double span = t[hi] - t[lo];
    const double u = span > 0.0 ? (when - t[lo]) / span : 0.0;
    return pos[lo] + (pos[hi] - pos[lo]) * u;
  }

  // Central-difference speed and heading; heading falls back when stationary.
  double speed_at(Timestamp when, double window = 0.25) const {
    const Vec2 d = at(when + 0.5 * window) - at(when - 0.5 * window);
    return d.norm() / window;
  }

  double heading_at(Timestamp when, double fallback, double window = 0.25) const {
    const Vec2 d = at(when + 0.5 * window) - at(when - 0.5 * window);
    if (d.norm() < 1e-6) return fallback;
    return std::atan2(d.y, d.x);
  }
};

std::map<int, TruthSeries> split_truth(const std::vector<TruthSample>& truth) {
  std::map<int, TruthSeries> series;
  for (const TruthSample& s : truth) {
    series[s.id].t.push_back(s.t);
    series[s.id].pos.push_back(s.pos);
  }
  return series;
}

}  // namespace

ScenarioEval evaluate(const std::vector<Warning>& warnings,
                      const std::vector<TruthSample>& truth, const RoutePath& route,
                      const RunConfig& cfg) {
  ScenarioEval eval;
  eval.warning_count = static_cast<int>(warnings.size());

  auto series = split_truth(truth);
  const auto ego_it = series.find(0);
  if (ego_it == series.end()) {
    if (truth.empty() && warnings.empty()) return eval;  // vacuous run
    throw std::invalid_argument("mismatched logs: truth has no ego trajectory (id 0)");
  }
  const TruthSeries& ego = ego_it->second;

  const auto inside_corridor = [&](const Vec2& p, Timestamp t) {
    const RouteProjection proj = project_point(p, route);
    if (proj.distance > cfg.warning.corridor_halfwidth) return false;
    const RouteProjection ego_proj = project_point(ego.at(t), route);
    return proj.s > ego_proj.s;
  };

  // Corridor entry events per actor, with the vehicle's time-to-arrive.
  struct Entry {
    Timestamp t;
    double t_veh;
  };
  std::map<int, std::vector<Entry>> entries;
  for (const auto& [id, actor] : series) {
    if (id == 0) continue;
    bool was_inside = false;
    for (std::size_t i = 0; i < actor.t.size(); ++i) {
      const bool now_inside = inside_corridor(actor.pos[i], actor.t[i]);
      if (now_inside && !was_inside) {
        const double v = ego.speed_at(actor.t[i]);
        if (v >= cfg.warning.speed_floor) {
          const double s_actor = project_point(actor.pos[i], route).s;
          const double s_ego = project_point(ego.at(actor.t[i]), route).s;
          entries[id].push_back({actor.t[i], (s_actor - s_ego) / v});
        }
      }
      was_inside = now_inside;
    }
  }

  // Match each warning to the actor closest to the predicted interception.
  std::map<int, int> warnings_per_actor;
  int direction_matches = 0;
  for (const Warning& w : warnings) {
    const double s_ego = project_point(ego.at(w.t_issued), route).s;
    const Vec2 predicted_point = point_at_arc(route, s_ego + w.conflict.s_intercept);
    const Timestamp t_meet = w.t_issued + w.conflict.t_veh;

    int best_id = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [id, actor] : series) {
      if (id == 0) continue;
      const double d = (actor.at(t_meet) - predicted_point).norm();
      if (d < best_dist) {
        best_dist = d;
        best_id = id;
      }
    }
    if (best_id < 0) {
      ++eval.false_warnings;
      continue;
    }
    warnings_per_actor[best_id]++;

    // False warning: the actor's true path never enters the corridor over
    // the prediction horizon from the moment of the warning.
    const TruthSeries& actor = series.at(best_id);
    bool enters = false;
    for (std::size_t i = 0; i < actor.t.size(); ++i) {
      if (actor.t[i] < w.t_issued || actor.t[i] > w.t_issued + cfg.warning.horizon) continue;
      if (inside_corridor(actor.pos[i], actor.t[i])) {
        enters = true;
        break;
      }
    }
    if (!enters) ++eval.false_warnings;

    // Direction word vs the true position once the prompt has played.
    const Pose2 ego_pose{ego.at(w.t_issued),
                         ego.heading_at(w.t_issued, cfg.initial_yaw)};
    const Vec2 future = actor.at(w.t_issued + cfg.warning.prompt_duration);
    const double y = world_to_vehicle(future, ego_pose).y;
    Direction truth_dir = Direction::ahead;
    if (y > cfg.warning.ahead_halfwidth) truth_dir = Direction::left;
    if (y < -cfg.warning.ahead_halfwidth) truth_dir = Direction::right;
    if (truth_dir == w.direction) ++direction_matches;

    if (!eval.first_warning_t) eval.first_warning_t = w.t_issued;
    if (w.severity == Severity::emergency && !eval.first_emergency_t) {
      eval.first_emergency_t = w.t_issued;
    }
  }

  if (!warnings.empty()) {
    eval.direction_accuracy =
        static_cast<double>(direction_matches) / static_cast<double>(warnings.size());
  }

  // Lead time between the first early warning and the first emergency.
  std::optional<double> first_early;
  for (const Warning& w : warnings) {
    if (w.severity == Severity::early) {
      first_early = w.t_issued;
      break;
    }
  }
  if (first_early && eval.first_emergency_t) {
    eval.lead_time = *eval.first_emergency_t - *first_early;
  }

  // Missed conflicts: true corridor entries the engine never warned about.
  for (const auto& [id, actor_entries] : entries) {
    for (const Entry& entry : actor_entries) {
      if (entry.t_veh < cfg.warning.t_warn && warnings_per_actor[id] == 0) {
        ++eval.missed_conflicts;
      }
    }
  }
  return eval;
}

int EvalReport::total_false_warnings() const {
  int n = 0;
  for (const ScenarioEval& e : runs) n += e.false_warnings;
  return n;
}

int EvalReport::total_missed_conflicts() const {
  int n = 0;
  for (const ScenarioEval& e : runs) n += e.missed_conflicts;
  return n;
}

namespace {

std::optional<double> mean_of(const std::vector<ScenarioEval>& runs,
                              std::optional<double> ScenarioEval::* field) {
  double sum = 0.0;
  int n = 0;
  for (const ScenarioEval& e : runs) {
    if (e.*field) {
      sum += *(e.*field);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

std::optional<double> EvalReport::mean_lead_time() const {
  return mean_of(runs, &ScenarioEval::lead_time);
}

std::optional<double> EvalReport::mean_first_warning_t() const {
  return mean_of(runs, &ScenarioEval::first_warning_t);
}

std::optional<double> EvalReport::mean_direction_accuracy() const {
  return mean_of(runs, &ScenarioEval::direction_accuracy);
}

nlohmann::ordered_json eval_to_json(const ScenarioEval& e) {
  nlohmann::ordered_json j;
  j["warning_count"] = e.warning_count;
  j["first_warning_t"] = e.first_warning_t ? nlohmann::ordered_json(*e.first_warning_t)
                                           : nlohmann::ordered_json(nullptr);
  j["first_emergency_t"] = e.first_emergency_t
                               ? nlohmann::ordered_json(*e.first_emergency_t)
                               : nlohmann::ordered_json(nullptr);
  j["lead_time"] =
      e.lead_time ? nlohmann::ordered_json(*e.lead_time) : nlohmann::ordered_json(nullptr);
  j["direction_accuracy"] = e.direction_accuracy
                                ? nlohmann::ordered_json(*e.direction_accuracy)
                                : nlohmann::ordered_json(nullptr);
  j["false_warnings"] = e.false_warnings;
  j["missed_conflicts"] = e.missed_conflicts;
  return j;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["runs"] = nlohmann::ordered_json::array();
  for (const ScenarioEval& e : report.runs) j["runs"].push_back(eval_to_json(e));

  nlohmann::ordered_json agg;
  agg["n_runs"] = report.runs.size();
  const auto opt = [](std::optional<double> v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  agg["mean_first_warning_t"] = opt(report.mean_first_warning_t());
  agg["mean_lead_time"] = opt(report.mean_lead_time());
  agg["mean_direction_accuracy"] = opt(report.mean_direction_accuracy());
  agg["total_false_warnings"] = report.total_false_warnings();
  agg["total_missed_conflicts"] = report.total_missed_conflicts();
  j["aggregate"] = agg;
  return j;
}

}  // namespace ewarn
