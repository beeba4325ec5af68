#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rexcam/correlation_model.hpp"
#include "rexcam/reid.hpp"
#include "rexcam/simulator.hpp"
#include "rexcam/types.hpp"

namespace rexcam {

enum class SchemeMode { kRexcam, kBaselineAll, kBaselineGeo };

enum class ReplayMode { kRealtime, kSkip, kFastForward };

enum class TrackingPhase : int { kPhase1 = 1, kPhase2 = 2, kFullNetwork = 3 };

struct TrackingConfig {
  SchemeMode mode = SchemeMode::kRexcam;
  double match_thresh = 0.5;
  FrameIndex exit_t = 900;  // frames without a match before declaring exit
  double replay_relax_factor = 10.0;
  ReplayMode replay_mode = ReplayMode::kRealtime;
  int replay_param = 2;  // stride for skip, speedup for fastforward
  double alpha = 1.0;    // EMA weight for the query representation
  double geo_radius_m = 400.0;  // baseline_geo proximity cutoff (4 * l)
  bool dedup_scored = true;     // never rescore a (camera, frame) pair
  std::optional<FrameIndex> horizon;  // stream end; defaults to streams.horizon
};

struct MatchRecord {
  DetectionEvent detection;
  double distance = 0.0;
  TrackingPhase phase_found = TrackingPhase::kPhase1;
  bool was_replay = false;
};

// Trigger/feedback audit entries; stands in for controller<->camera messages.
struct TrackEvent {
  std::string kind;  // "trigger" or "feedback"
  CameraId camera = 0;
  FrameIndex frame = 0;
  std::string payload;
};

struct TrackResult {
  int query_id = 0;
  std::vector<MatchRecord> matches;
  std::int64_t frames_processed = 0;   // camera-frames scored
  std::int64_t detections_scored = 0;
  std::int64_t delay_frames = 0;
  std::int64_t replay_steps = 0;         // frame steps traversed behind live
  std::int64_t replay_steps_scored = 0;  // of those, steps actually scored
  std::array<std::int64_t, 3> frames_by_phase{0, 0, 0};
  std::optional<FrameIndex> exit_declared_at;
  bool any_replay_match = false;  // pruning miss: found only via replay
  std::vector<TrackEvent> events;
};

// Wall-clock cost of replaying n past frame steps under the given mode.
FrameIndex replay_cost(ReplayMode mode, std::int64_t n_replay_frames, int param);

TrackResult track_query(const DetectionStreams& streams, const CameraNetwork& network,
                        const SpatioTemporalModel& model, const QuerySpec& query,
                        const TrackingConfig& config);

std::vector<TrackResult> run_workload(const DetectionStreams& streams,
                                      const CameraNetwork& network,
                                      const SpatioTemporalModel& model,
                                      const std::vector<QuerySpec>& queries,
                                      const TrackingConfig& config,
                                      int n_threads = 1);

// Honors the REXCAM_THREADS env var (defaults to 1).
int threads_from_env();

}  // namespace rexcam
