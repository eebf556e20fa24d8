#include <sstream>
#include <stdexcept>

#include <httplib.h>

#include "ewarn/route.hpp"

namespace ewarn {

RoutePath HttpRouteProvider::provide(const Pose2& start, const Vec2& dest) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(5, 0);

  std::ostringstream path;
  path << "/route?start=" << start.position.x << ',' << start.position.y
       << "&dest=" << dest.x << ',' << dest.y;

  const httplib::Result res = client.Get(path.str());
  if (!res) {
    throw std::runtime_error("route provider unreachable: " + base_url_);
  }
  if (res->status != 200) {
    std::ostringstream msg;
    msg << "route provider returned HTTP " << res->status;
    throw std::runtime_error(msg.str());
  }
  return route_from_json(nlohmann::json::parse(res->body));
}

}  // namespace ewarn
