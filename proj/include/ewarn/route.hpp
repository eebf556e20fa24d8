#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewarn/geometry.hpp"

namespace ewarn {

struct Maneuver {
  double s = 0.0;  // arc-length position, m
  std::string text;  // e.g. "turn right"
};

// Most-probable-path polyline, world frame, arc-length parameterized.
struct RoutePath {
  std::vector<Vec2> polyline;
  std::vector<double> arc_length;  // cumulative, per vertex, strictly increasing
  std::vector<Maneuver> maneuvers;

  double total_length() const { return arc_length.empty() ? 0.0 : arc_length.back(); }
};

// Validates and arc-length-parameterizes a polyline. Throws on fewer than
// two vertices or zero-length segments.
RoutePath make_route(std::vector<Vec2> polyline, std::vector<Maneuver> maneuvers = {});

struct RouteFix {
  double s = 0.0;            // arc length of the projection, m
  double cross_track = 0.0;  // m, signed, + left of the route direction
  double heading_error = 0.0;  // rad
};

// Nearest point on a polyline.
struct RouteProjection {
  double s = 0.0;
  double distance = 0.0;
  Vec2 point;  // closest point on the route
};

RouteProjection project_point(const Vec2& p, const RoutePath& route);

// Point at arc-length s, clamped to the route ends.
Vec2 point_at_arc(const RoutePath& route, double s);

// Projects the ego pose onto the route; ties broken toward smaller s.
RouteFix project(const Pose2& ego, const RoutePath& route);

enum class RouteStatus { on_route, deviated };

struct DeviationConfig {
  double max_cross_track = 20.0;                 // m
  double max_heading_error = 45.0 * M_PI / 180;  // rad
};

RouteStatus check_deviation(const RouteFix& fix, const DeviationConfig& cfg = {});

class RouteProvider {
 public:
  virtual ~RouteProvider() = default;
  virtual RoutePath provide(const Pose2& start, const Vec2& dest) = 0;
};

// Fetches a route from a provider and validates it. Throws on a degenerate
// request (start == dest) or provider failure.
RoutePath provide_route(const Pose2& start, const Vec2& dest, RouteProvider& provider);

// Two-vertex straight line from start to dest.
class LineRouteProvider final : public RouteProvider {
 public:
  RoutePath provide(const Pose2& start, const Vec2& dest) override;
};

// Fixed geometry from a JSON route file; ignores start/dest.
class FileRouteProvider final : public RouteProvider {
 public:
  explicit FileRouteProvider(std::string path) : path_(std::move(path)) {}
  RoutePath provide(const Pose2& start, const Vec2& dest) override;

 private:
  std::string path_;
};

// GET {base_url}/route?start=x,y&dest=x,y returning the JSON route schema.
class HttpRouteProvider final : public RouteProvider {
 public:
  explicit HttpRouteProvider(std::string base_url) : base_url_(std::move(base_url)) {}
  RoutePath provide(const Pose2& start, const Vec2& dest) override;

 private:
  std::string base_url_;
};

// JSON schema: {"polyline":[[x,y],...],"maneuvers":[{"s":m,"text":str}]}
RoutePath route_from_json(const nlohmann::json& j);
nlohmann::ordered_json route_to_json(const RoutePath& route);

}  // namespace ewarn
