#include "ewarn/route.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ewarn {

RoutePath make_route(std::vector<Vec2> polyline, std::vector<Maneuver> maneuvers) {
  if (polyline.size() < 2) throw std::invalid_argument("route needs at least 2 vertices");

  RoutePath route;
  route.arc_length.reserve(polyline.size());
  route.arc_length.push_back(0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const double seg = (polyline[i] - polyline[i - 1]).norm();
    if (seg <= 1e-9) {
      std::ostringstream msg;
      msg << "route has a zero-length segment at vertex " << i;
      throw std::invalid_argument(msg.str());
    }
    route.arc_length.push_back(route.arc_length.back() + seg);
  }
  route.polyline = std::move(polyline);
  route.maneuvers = std::move(maneuvers);
  return route;
}

RouteProjection project_point(const Vec2& p, const RoutePath& route) {
  RouteProjection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < route.polyline.size(); ++i) {
    const Vec2 a = route.polyline[i];
    const Vec2 b = route.polyline[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double u = (p - a).dot(ab) / len2;
    u = std::max(0.0, std::min(1.0, u));
    const Vec2 q = a + ab * u;
    const double d = (p - q).norm();
    // Strict comparison keeps the earlier (smaller s) candidate on ties.
    if (d < best_dist - 1e-12) {
      best_dist = d;
      best.s = route.arc_length[i] + u * std::sqrt(len2);
      best.distance = d;
      best.point = q;
    }
  }
  return best;
}

Vec2 point_at_arc(const RoutePath& route, double s) {
  if (s <= 0.0) return route.polyline.front();
  for (std::size_t i = 0; i + 1 < route.polyline.size(); ++i) {
    if (s <= route.arc_length[i + 1]) {
      const double seg = route.arc_length[i + 1] - route.arc_length[i];
      const double u = (s - route.arc_length[i]) / seg;
      return route.polyline[i] + (route.polyline[i + 1] - route.polyline[i]) * u;
    }
  }
  return route.polyline.back();
}

RouteFix project(const Pose2& ego, const RoutePath& route) {
  const RouteProjection proj = project_point(ego.position, route);

  // Segment direction at the projection, taken from the owning segment.
  std::size_t seg = 0;
  for (std::size_t i = 0; i + 1 < route.polyline.size(); ++i) {
    if (proj.s <= route.arc_length[i + 1] + 1e-12) {
      seg = i;
      break;
    }
  }
  const Vec2 dir = route.polyline[seg + 1] - route.polyline[seg];
  const double route_heading = std::atan2(dir.y, dir.x);

  RouteFix fix;
  fix.s = proj.s;
  const double side = dir.cross(ego.position - proj.point);
  fix.cross_track = (side >= 0.0 ? 1.0 : -1.0) * proj.distance;
  fix.heading_error = normalize_angle(ego.heading - route_heading);
  return fix;
}

RouteStatus check_deviation(const RouteFix& fix, const DeviationConfig& cfg) {
  if (std::abs(fix.cross_track) > cfg.max_cross_track) return RouteStatus::deviated;
  if (std::abs(fix.heading_error) > cfg.max_heading_error) return RouteStatus::deviated;
  return RouteStatus::on_route;
}

RoutePath provide_route(const Pose2& start, const Vec2& dest, RouteProvider& provider) {
  if ((dest - start.position).norm() <= 1e-9) {
    throw std::invalid_argument("degenerate route request: start equals destination");
  }
  return provider.provide(start, dest);
}

RoutePath LineRouteProvider::provide(const Pose2& start, const Vec2& dest) {
  return make_route({start.position, dest});
}

RoutePath FileRouteProvider::provide(const Pose2&, const Vec2&) {
  std::ifstream in(path_);
  if (!in) throw std::runtime_error("cannot open route file: " + path_);
  nlohmann::json j;
  in >> j;
  return route_from_json(j);
}

RoutePath route_from_json(const nlohmann::json& j) {
  std::vector<Vec2> polyline;
  for (const auto& v : j.at("polyline")) {
    polyline.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  }
  std::vector<Maneuver> maneuvers;
  if (j.contains("maneuvers")) {
    for (const auto& m : j.at("maneuvers")) {
      maneuvers.push_back({m.at("s").get<double>(), m.at("text").get<std::string>()});
    }
  }
  return make_route(std::move(polyline), std::move(maneuvers));
}

nlohmann::ordered_json route_to_json(const RoutePath& route) {
  nlohmann::ordered_json j;
  j["polyline"] = nlohmann::ordered_json::array();
  for (const Vec2& v : route.polyline) {
    j["polyline"].push_back({v.x, v.y});
  }
  j["maneuvers"] = nlohmann::ordered_json::array();
  for (const Maneuver& m : route.maneuvers) {
    nlohmann::ordered_json jm;
    jm["s"] = m.s;
    jm["text"] = m.text;
    j["maneuvers"].push_back(jm);
  }
  return j;
}

}  // namespace ewarn
