#pragma once

#include <string>

#include <json.hpp>

#include "ewarn/conflict.hpp"
#include "ewarn/ekf.hpp"
#include "ewarn/prediction.hpp"
#include "ewarn/route.hpp"
#include "ewarn/scenario.hpp"
#include "ewarn/tracking.hpp"

namespace ewarn {

enum class RouteProviderKind { line, file, http };

// Every tunable in one place. Parsed configs re-serialize to the same bytes
// (round-trip fixed point), and any field can be overridden from the CLI.
struct RunConfig {
  EkfConfig ekf;
  TrackerConfig tracking;
  FitConfig prediction;
  WarningConfig warning;
  DeviationConfig deviation;
  CameraModel camera;       // defaults for scenarios that do not pin their own
  SensorNoise noise;
  double initial_yaw = 0.0;  // analysis-frame rotation when no route is given

  RouteProviderKind route_provider = RouteProviderKind::line;
  std::string route_file;
  std::string route_url;     // falls back to $EWARN_ROUTE_URL
  Vec2 route_dest{200.0, 0.0};
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& cfg);

}  // namespace ewarn
