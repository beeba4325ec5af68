#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rexcam/types.hpp"

namespace rexcam {

// Transition counts n(c_s, c_d) plus per-source counts of entities that left
// the network after c_s. Rows of spatial_degree (including the exit fraction)
// sum to 1 for any source with outgoing traffic.
struct SpatialMatrix {
  std::map<CameraPair, std::int64_t> counts;
  std::map<CameraId, std::int64_t> exit_counts;

  std::int64_t total_departures(CameraId src) const;
};

// Travel-time histogram for one ordered camera pair. Bin b covers offsets
// [b*bin_width, (b+1)*bin_width); delta_min is the smallest observed offset.
struct TravelTimeHistogram {
  std::vector<std::int64_t> bins;
  FrameIndex bin_width = 1;
  FrameIndex delta_min = 0;

  std::int64_t total() const;
  void add(FrameIndex delta);
  // Count of offsets whose bin midpoint falls in [lo, hi].
  std::int64_t count_in_window(double lo, double hi) const;
};

struct SpatioTemporalModel {
  SpatialMatrix spatial;
  std::map<CameraPair, TravelTimeHistogram> temporal;
  double s_thresh = 0.05;
  double t_thresh = 0.02;
  FrameIndex bin_width = 1;
  int n_cameras = 0;
  // When false the temporal clause of the model is skipped entirely
  // (the "S-only" filter variants).
  bool temporal_enabled = true;
};

// S(c_s, c_d): fraction of departures from c_s that arrive next at c_d.
// Returns 0 when c_s has no recorded departures.
double spatial_degree(const SpatioTemporalModel& model, CameraId c_s, CameraId c_d);

// Fraction of recorded c_s -> c_d arrivals whose travel offset falls in
// [delta_lo, delta_hi], at bin granularity. Returns 0 when the pair has no traffic.
double temporal_degree(const SpatioTemporalModel& model, CameraId c_s, CameraId c_d,
                       double delta_lo, double delta_hi);

// The boolean filter M: true iff c_d is spatially correlated with c_s and
// f_curr falls in the dense part of the pair's travel-time distribution.
bool model_eval(const SpatioTemporalModel& model, CameraId c_s, CameraId c_d,
                FrameIndex f_q, FrameIndex f_curr);

std::set<CameraId> filter_cameras(const SpatioTemporalModel& model, CameraId c_q,
                                  FrameIndex f_q, FrameIndex f_curr,
                                  const std::set<CameraId>& cameras);

// Copy of the model with both thresholds divided by factor (> 1).
SpatioTemporalModel relax(const SpatioTemporalModel& model, double factor);

void save_model(const SpatioTemporalModel& model, const std::string& path);
SpatioTemporalModel load_model(const std::string& path);

std::string model_to_json(const SpatioTemporalModel& model);
SpatioTemporalModel model_from_json(const std::string& text);

bool models_equal(const SpatioTemporalModel& a, const SpatioTemporalModel& b);

}  // namespace rexcam
