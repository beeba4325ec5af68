#pragma once

#include <deque>
#include <span>
#include <vector>

#include "rexcam/correlation_model.hpp"
#include "rexcam/types.hpp"

namespace rexcam {

// One entity move between cameras (or out of the network).
struct TransitionRecord {
  EntityId entity = 0;
  CameraId src = 0;
  CameraId dst = kExitCamera;  // kExitCamera marks a network exit
  FrameIndex depart_frame = 0;
  FrameIndex delta = 0;  // first sighting at dst minus depart_frame; 0 for exits
};

// A maximal run of sightings of one entity on one camera. Used both for
// transition extraction and for per-visit recall scoring.
struct CameraVisit {
  EntityId entity = 0;
  CameraId camera = 0;
  FrameIndex first_frame = 0;
  FrameIndex last_frame = 0;
};

// Segments labels into per-entity camera visits. Consecutive same-camera
// sightings with an inter-frame gap <= gap_thresh belong to one visit.
std::vector<CameraVisit> segment_visits(std::span<const LabeledDetection> labels,
                                        FrameIndex gap_thresh);

// Per entity, each adjacent visit pair yields one transition; the final visit
// yields an exit record. A -> B via C produces A -> C and C -> B, never A -> B.
std::vector<TransitionRecord> extract_transitions(
    std::span<const LabeledDetection> labels, FrameIndex gap_thresh);

SpatioTemporalModel build_model(std::span<const TransitionRecord> transitions,
                                double s_thresh, double t_thresh,
                                FrameIndex bin_width, int n_cameras);

// Uniform frame subsampling: keeps detections whose frame index modulo
// stride_base falls in the first keep_count residues.
std::vector<LabeledDetection> sample_labels(std::span<const LabeledDetection> labels,
                                            int keep_count, int stride_base);

// Sliding window over tracking outcomes; flags a spike in pruning misses
// relative to a baseline rate.
class DriftMonitor {
 public:
  DriftMonitor(std::size_t window_len = 200, double spike_factor = 3.0);

  void record_outcome(bool was_pruning_miss);
  bool should_reprofile() const;
  void set_baseline(double rate) { baseline_rate_ = rate; }

  double window_rate() const;
  double baseline_rate() const { return baseline_rate_; }

 private:
  std::size_t window_len_;
  double spike_factor_;
  double baseline_rate_ = -1.0;  // estimated from the first full window
  std::deque<bool> window_;
};

}  // namespace rexcam
