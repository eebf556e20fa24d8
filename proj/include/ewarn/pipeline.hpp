#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ewarn/config.hpp"
#include "ewarn/conflict.hpp"
#include "ewarn/route.hpp"
#include "ewarn/scenario.hpp"

namespace ewarn {

// Called when the ego deviates from the route; returns the replacement route
// (e.g. a fresh provider request) or nothing to keep the current one.
using RerouteFn = std::function<std::optional<RoutePath>(const Pose2& ego)>;

// Replays time-ordered sensor logs through the fusion -> tracking ->
// prediction -> conflict chain at camera-frame cadence. Deterministic:
// identical inputs give identical warning sequences.
std::vector<Warning> run_pipeline(const RunConfig& cfg,
                                  const std::vector<Detection>& detections,
                                  const std::vector<EgoSensorRecord>& ego_log,
                                  const RoutePath& route,
                                  const RerouteFn& reroute = nullptr);

// Per-scenario quality metrics against ground truth.
struct ScenarioEval {
  int warning_count = 0;
  std::optional<double> first_warning_t;   // s, first early warning
  std::optional<double> first_emergency_t; // s
  std::optional<double> lead_time;         // s, set only when both events occur
  std::optional<double> direction_accuracy;  // fraction of warnings, when any
  int false_warnings = 0;
  int missed_conflicts = 0;
};

ScenarioEval evaluate(const std::vector<Warning>& warnings,
                      const std::vector<TruthSample>& truth, const RoutePath& route,
                      const RunConfig& cfg);

// Aggregate over per-seed runs of the same scenario.
struct EvalReport {
  std::vector<ScenarioEval> runs;

  int total_false_warnings() const;
  int total_missed_conflicts() const;
  std::optional<double> mean_lead_time() const;
  std::optional<double> mean_first_warning_t() const;
  std::optional<double> mean_direction_accuracy() const;
};

nlohmann::ordered_json eval_to_json(const ScenarioEval& e);
nlohmann::ordered_json report_to_json(const EvalReport& report);

}  // namespace ewarn
