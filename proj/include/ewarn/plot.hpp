#pragma once

#include <map>
#include <string>
#include <vector>

#include "ewarn/conflict.hpp"
#include "ewarn/tracking.hpp"

namespace ewarn {

// Analysis-frame trajectory plot, one polyline per track with a marker dot
// on the 30th sample. Optional ground-truth overlays are drawn dashed.
// Empty input yields a valid SVG with axes only (and a note on stderr).
std::string trajectory_svg(const std::map<int, std::vector<TrackSample>>& tracks,
                           const std::map<int, std::vector<TrackSample>>& truth = {});

// Event timeline: per-track detection spans plus warning/emergency markers.
std::string timeline_svg(const std::map<int, std::vector<Timestamp>>& detection_times,
                         const std::vector<Warning>& warnings);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ewarn
