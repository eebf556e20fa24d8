#include "ewarn/geometry.hpp"

#include <sstream>

namespace ewarn {

Vec2 to_world(const Detection& det, const Pose2& ego) {
  return ego.position + rotate(det.pos_vehicle, ego.heading);
}

Vec2 to_world_checked(const Detection& det, const Pose2& ego, Timestamp ego_t,
                      double tolerance) {
  const double gap = std::abs(det.t - ego_t);
  if (gap > tolerance) {
    std::ostringstream msg;
    msg << "stale ego pose: detection t=" << det.t << " vs ego t=" << ego_t
        << " (gap " << gap << "s exceeds " << tolerance << "s)";
    throw StaleEgoError(msg.str());
  }
  return to_world(det, ego);
}

}  // namespace ewarn
