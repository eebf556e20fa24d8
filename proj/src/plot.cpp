#include "ewarn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace ewarn {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 600;
constexpr int kMargin = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

const char* color_for(int index) { return kPalette[index % 8]; }

struct Bounds {
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  bool any = false;

  void include(double x, double y) {
    if (!any) {
      min_x = max_x = x;
      min_y = max_y = y;
      any = true;
      return;
    }
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }

  void pad() {
    const double dx = std::max(1.0, 0.05 * (max_x - min_x));
    const double dy = std::max(1.0, 0.05 * (max_y - min_y));
    min_x -= dx;
    max_x += dx;
    min_y -= dy;
    max_y += dy;
  }
};

struct Mapper {
  Bounds b;
  double px(double x) const {
    return kMargin + (x - b.min_x) / (b.max_x - b.min_x) * (kWidth - 2 * kMargin);
  }
  double py(double y) const {
    // SVG y grows downward.
    return kHeight - kMargin - (y - b.min_y) / (b.max_y - b.min_y) * (kHeight - 2 * kMargin);
  }
};

void open_svg(std::ostringstream& svg) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void draw_axes(std::ostringstream& svg, const Mapper& m, const std::string& x_label,
               const std::string& y_label) {
  svg << "<g stroke=\"#333\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
      << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin << "\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
      << "\" y2=\"" << kHeight - kMargin << "\"/>\n</g>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
      << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kHeight / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kHeight / 2 << ")\">" << y_label << "</text>\n";
  // Corner tick labels are enough to read scale off the plot.
  svg << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 18
      << "\" font-size=\"11\">" << m.b.min_x << "</text>\n";
  svg << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 18
      << "\" font-size=\"11\" text-anchor=\"end\">" << m.b.max_x << "</text>\n";
  svg << "<text x=\"" << kMargin - 6 << "\" y=\"" << kHeight - kMargin
      << "\" font-size=\"11\" text-anchor=\"end\">" << m.b.min_y << "</text>\n";
  svg << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + 4
      << "\" font-size=\"11\" text-anchor=\"end\">" << m.b.max_y << "</text>\n";
}

}  // namespace

std::string trajectory_svg(const std::map<int, std::vector<TrackSample>>& tracks,
                           const std::map<int, std::vector<TrackSample>>& truth) {
  Bounds bounds;
  for (const auto& [id, samples] : tracks) {
    for (const TrackSample& s : samples) bounds.include(s.pos.x, s.pos.y);
  }
  for (const auto& [id, samples] : truth) {
    for (const TrackSample& s : samples) bounds.include(s.pos.x, s.pos.y);
  }
  if (!bounds.any) {
    std::cerr << "trajectory plot: no samples, emitting empty axes\n";
    bounds = Bounds{0.0, 10.0, -5.0, 5.0, true};
  }
  bounds.pad();
  const Mapper m{bounds};

  std::ostringstream svg;
  open_svg(svg);
  draw_axes(svg, m, "longitudinal x [m]", "lateral y [m]");

  for (const auto& [id, samples] : truth) {
    if (samples.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"#999\" stroke-width=\"1\" "
           "stroke-dasharray=\"5,4\" points=\"";
    for (const TrackSample& s : samples) svg << m.px(s.pos.x) << ',' << m.py(s.pos.y) << ' ';
    svg << "\"/>\n";
  }

  int color_index = 0;
  for (const auto& [id, samples] : tracks) {
    if (samples.empty()) continue;
    const char* color = color_for(color_index++);
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const TrackSample& s : samples) svg << m.px(s.pos.x) << ',' << m.py(s.pos.y) << ' ';
    svg << "\"/>\n";
    // Dot marking the 30th sample of the track, when it got that far.
    if (samples.size() >= 30) {
      const TrackSample& s30 = samples[29];
      svg << "<circle cx=\"" << m.px(s30.pos.x) << "\" cy=\"" << m.py(s30.pos.y)
          << "\" r=\"5\" fill=\"" << color << "\"/>\n";
    }
    svg << "<text x=\"" << m.px(samples.front().pos.x) + 6 << "\" y=\""
        << m.py(samples.front().pos.y) - 6 << "\" font-size=\"11\" fill=\"" << color
        << "\">id " << id << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string timeline_svg(const std::map<int, std::vector<Timestamp>>& detection_times,
                         const std::vector<Warning>& warnings) {
  Bounds bounds;
  int row = 0;
  for (const auto& [id, times] : detection_times) {
    ++row;
    for (const Timestamp t : times) bounds.include(t, row);
  }
  for (const Warning& w : warnings) bounds.include(w.t_issued, 0.0);
  if (!bounds.any) {
    std::cerr << "timeline plot: no events, emitting empty axes\n";
    bounds = Bounds{0.0, 10.0, 0.0, 1.0, true};
  }
  bounds.min_y = -1.0;
  bounds.max_y = row + 1.0;
  bounds.pad();
  const Mapper m{bounds};

  std::ostringstream svg;
  open_svg(svg);
  draw_axes(svg, m, "time [s]", "track");

  int color_index = 0;
  int r = 0;
  for (const auto& [id, times] : detection_times) {
    ++r;
    const char* color = color_for(color_index++);
    for (const Timestamp t : times) {
      svg << "<circle cx=\"" << m.px(t) << "\" cy=\"" << m.py(r) << "\" r=\"1.5\" fill=\""
          << color << "\"/>\n";
    }
    svg << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\"" << m.py(r) + 4
        << "\" font-size=\"11\" fill=\"" << color << "\">id " << id << "</text>\n";
  }

  for (const Warning& w : warnings) {
    const bool emergency = w.severity == Severity::emergency;
    const char* color = emergency ? "#d62728" : "#ff7f0e";
    svg << "<line x1=\"" << m.px(w.t_issued) << "\" y1=\"" << kMargin << "\" x2=\""
        << m.px(w.t_issued) << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << m.px(w.t_issued) + 4 << "\" y=\"" << kMargin + 14
        << "\" font-size=\"11\" fill=\"" << color << "\">" << to_string(w.severity)
        << " (" << to_string(w.direction) << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

}  // namespace ewarn
