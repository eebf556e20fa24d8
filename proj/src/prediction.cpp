#include "ewarn/prediction.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ewarn {

namespace {

struct AxisFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
};

// OLS of y against (t - t_ref).
AxisFit ols(const std::vector<TrackSample>& samples, std::size_t first, Timestamp t_ref,
            bool lateral) {
  const std::size_t n = samples.size() - first;
  double sum_t = 0.0, sum_y = 0.0;
  for (std::size_t i = first; i < samples.size(); ++i) {
    sum_t += samples[i].t - t_ref;
    sum_y += lateral ? samples[i].pos.y : samples[i].pos.x;
  }
  const double mean_t = sum_t / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i < samples.size(); ++i) {
    const double dt = (samples[i].t - t_ref) - mean_t;
    const double dy = (lateral ? samples[i].pos.y : samples[i].pos.x) - mean_y;
    sxx += dt * dt;
    sxy += dt * dy;
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_track: zero time spread");

  AxisFit fit;
  fit.beta1 = sxy / sxx;
  fit.beta0 = mean_y - fit.beta1 * mean_t;
  return fit;
}

}  // namespace

TrajectoryFit fit_track(const PedTrack& track, const FitConfig& cfg) {
  if (track.samples.size() < 2) {
    throw std::invalid_argument("fit_track: need at least 2 samples");
  }
  const std::size_t window = static_cast<std::size_t>(std::max(cfg.window, 2));
  const std::size_t first =
      track.samples.size() > window ? track.samples.size() - window : 0;

  TrajectoryFit fit;
  fit.n_samples = static_cast<int>(track.samples.size() - first);
  fit.t_ref = track.samples[first].t;

  const AxisFit lat = ols(track.samples, first, fit.t_ref, true);
  const AxisFit lon = ols(track.samples, first, fit.t_ref, false);

  fit.beta0_lat = lat.beta0;
  fit.beta1_lat = lat.beta1;
  fit.lat_valid = fit.n_samples >= cfg.min_lat_samples;
  fit.long_valid = fit.n_samples >= cfg.min_long_samples;

  if (fit.long_valid) {
    fit.beta0_long = lon.beta0;
    fit.beta1_long = lon.beta1;
  } else {
    // Conservative: below the longitudinal gate the pedestrian is assumed
    // longitudinally stationary at the latest observation.
    fit.beta0_long = track.samples.back().pos.x;
    fit.beta1_long = 0.0;
  }

  const double speed = std::hypot(fit.beta1_lat, fit.beta1_long);
  fit.speed_gate_failed = speed > cfg.v_max;
  return fit;
}

Vec2 predict_position(const TrajectoryFit& fit, Timestamp t) {
  if (!fit.lat_valid) {
    throw std::invalid_argument("predict_position: fit is not lateral-valid");
  }
  if (t < fit.t_ref) {
    throw std::invalid_argument("predict_position: t precedes the fit origin");
  }
  const double dt = t - fit.t_ref;
  return {fit.beta0_long + fit.beta1_long * dt, fit.beta0_lat + fit.beta1_lat * dt};
}

}  // namespace ewarn
