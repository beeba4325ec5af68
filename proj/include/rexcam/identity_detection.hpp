#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "rexcam/correlation_model.hpp"
#include "rexcam/simulator.hpp"
#include "rexcam/types.hpp"

namespace rexcam {

using EntryPriors = std::map<CameraId, double>;

// Fraction of entities whose first sighting is at each camera; sums to 1.
EntryPriors estimate_entry_priors(std::span<const LabeledDetection> labels);

// Belief grid over (camera, window) cells. Scores are unnormalized likelihoods:
// overlapping contributions can push them past 1.
struct BeliefState {
  int n_cameras = 0;
  FrameIndex window_len = 0;
  EntryPriors priors;
  // scores[w][c] = P_{c,w}; rows appended as windows are propagated.
  std::vector<std::vector<double>> scores;
  // searched[w][c] = true once cell (c, w) has been fully scanned (I = 0).
  std::vector<std::vector<bool>> searched;

  void ensure_window(int w);
  bool is_searched(int c, int w) const;
};

// Fills scores for window w from the priors and the unsearched mass of all
// windows <= w, routed through the model's spatial and temporal correlations.
void propagate(BeliefState& state, const SpatioTemporalModel& model, int w);

struct DetectionSchedule {
  std::vector<CameraId> targets;  // cameras to scan in the current window
};

DetectionSchedule schedule_search(const BeliefState& state, double theta, int w);

struct DetectionReport {
  bool found = false;
  CameraId camera = 0;
  FrameIndex frame = 0;
  std::int64_t cells_searched = 0;
  std::int64_t cells_total = 0;
};

DetectionReport detect_identity(const DetectionStreams& streams,
                                const SpatioTemporalModel& model,
                                const EntryPriors& priors, double theta,
                                const FeatureVector& query_feature,
                                double match_thresh, FrameIndex window_len);

// Helper for picking theta on the score scale.
double score_quantile(std::vector<double> scores, double q);

}  // namespace rexcam
