#pragma once

#include "ewarn/geometry.hpp"
#include "ewarn/tracking.hpp"

namespace ewarn {

// Per-axis linear motion model fitted over a track's recent samples:
//   lat(t)  = beta0_lat  + beta1_lat  * (t - t_ref)
//   long(t) = beta0_long + beta1_long * (t - t_ref)
// Lateral estimates are usable from 12 samples, longitudinal from 30; below
// the longitudinal gate the model freezes the longitudinal coordinate at the
// last observation (beta1_long = 0).
struct TrajectoryFit {
  Timestamp t_ref = 0.0;   // time origin of the regression
  double beta0_lat = 0.0;  // m
  double beta1_lat = 0.0;  // m/s
  double beta0_long = 0.0;
  double beta1_long = 0.0;
  int n_samples = 0;
  bool lat_valid = false;
  bool long_valid = false;
  bool speed_gate_failed = false;  // fitted speed above jogging pace; unusable for warnings

  bool usable_for_warnings() const { return lat_valid && !speed_gate_failed; }
};

struct FitConfig {
  int window = 54;           // most recent samples considered (~1.5 s at 36 Hz)
  int min_lat_samples = 12;  // ~333 ms at 36 Hz
  int min_long_samples = 30; // ~833 ms at 36 Hz
  double v_max = 3.5;        // m/s, jogging pace
};

// Ordinary least squares per axis over the most recent window.
// Throws std::invalid_argument with fewer than 2 samples or zero time spread.
TrajectoryFit fit_track(const PedTrack& track, const FitConfig& cfg = {});

// Evaluates the fitted model at time t (analysis frame: x long, y lat).
// Requires lat_valid and t >= t_ref.
Vec2 predict_position(const TrajectoryFit& fit, Timestamp t);

}  // namespace ewarn
