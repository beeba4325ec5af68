#include "rexcam/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <stdexcept>
#include <unordered_set>

namespace rexcam {

namespace {

// Phase 1 (or 2) is exhausted once every spatially correlated peer's temporal
// window has closed: the cumulative arrival mass since delta_min has passed
// 1 - t_thresh. A window that has not opened yet keeps the phase alive.
bool windows_closed(const SpatioTemporalModel& model, CameraId c_q, FrameIndex f_q,
                    FrameIndex f_curr, int n_cameras) {
  for (CameraId d = 0; d < n_cameras; ++d) {
    if (spatial_degree(model, c_q, d) < model.s_thresh) continue;
    if (!model.temporal_enabled) return false;
    auto it = model.temporal.find({c_q, d});
    if (it == model.temporal.end() || it->second.total() == 0) continue;
    const FrameIndex delta = f_curr - f_q;
    if (delta < it->second.delta_min) return false;
    const double arrived =
        temporal_degree(model, c_q, d, static_cast<double>(it->second.delta_min),
                        static_cast<double>(delta));
    if (arrived <= 1.0 - model.t_thresh) return false;
  }
  return true;  // no peer, or every window has passed its dense mass
}

struct PairHash {
  std::size_t operator()(const CameraPair& p) const {
    return std::hash<std::int64_t>()((static_cast<std::int64_t>(p.first) << 40) ^
                                     p.second);
  }
};

}  // namespace

FrameIndex replay_cost(ReplayMode mode, std::int64_t n_replay_frames, int param) {
  if (n_replay_frames < 0) {
    throw std::invalid_argument("replay_cost: negative frame count");
  }
  switch (mode) {
    case ReplayMode::kRealtime:
      return n_replay_frames;
    case ReplayMode::kSkip:
    case ReplayMode::kFastForward:
      return (n_replay_frames + param - 1) / param;
  }
  return n_replay_frames;
}

TrackResult track_query(const DetectionStreams& streams, const CameraNetwork& network,
                        const SpatioTemporalModel& model, const QuerySpec& query,
                        const TrackingConfig& config) {
  const int n_cameras = static_cast<int>(network.cameras.size());
  for (const auto& [cam, stream] : streams.by_camera) {
    if (cam < 0 || cam >= n_cameras) {
      throw std::runtime_error("track_query: stream camera " + std::to_string(cam) +
                               " not in the network roster");
    }
  }

  std::set<CameraId> roster;
  for (const Camera& cam : network.cameras) roster.insert(cam.id);

  const SpatioTemporalModel relaxed =
      config.mode == SchemeMode::kRexcam ? relax(model, config.replay_relax_factor)
                                         : model;

  TrackResult res;
  FeatureVector q_feat = query.query_feature;
  FrameIndex f_q = query.query_frame;
  CameraId c_q = query.query_camera;
  TrackingPhase phase = TrackingPhase::kPhase1;
  const FrameIndex horizon = config.horizon.value_or(streams.horizon);
  FrameIndex frontier = f_q;  // latest frame processed live
  std::int64_t episode_steps = 0;
  bool in_episode = false;
  std::unordered_set<CameraPair, PairHash> scored;

  const auto settle_episode = [&]() {
    if (!in_episode) return;
    res.delay_frames += replay_cost(config.replay_mode, episode_steps, config.replay_param);
    episode_steps = 0;
    in_episode = false;
  };
  const auto phase_index = [&]() { return static_cast<int>(phase) - 1; };

  FrameIndex f_curr = f_q + 1;
  while (true) {
    if (f_curr > horizon) {
      settle_episode();
      break;  // stream ended
    }
    if (f_curr - f_q > config.exit_t) {
      if (config.mode == SchemeMode::kRexcam && phase == TrackingPhase::kPhase1) {
        phase = TrackingPhase::kPhase2;
        in_episode = true;
        res.events.push_back({"trigger", c_q, f_curr, "phase2"});
        f_curr = f_q + 1;
        continue;
      }
      if (config.mode == SchemeMode::kRexcam && phase == TrackingPhase::kPhase2) {
        phase = TrackingPhase::kFullNetwork;
        res.events.push_back({"trigger", c_q, f_curr, "full_network"});
        f_curr = f_q + 1;
        continue;
      }
      settle_episode();
      res.exit_declared_at = f_curr;
      res.events.push_back({"trigger", c_q, f_curr, "exit"});
      break;
    }

    std::set<CameraId> candidates;
    if (config.mode == SchemeMode::kBaselineAll ||
        phase == TrackingPhase::kFullNetwork) {
      candidates = roster;
    } else if (config.mode == SchemeMode::kBaselineGeo) {
      for (CameraId c : roster) {
        if (network.distance(c_q, c) <= config.geo_radius_m) candidates.insert(c);
      }
    } else {
      const SpatioTemporalModel& active =
          phase == TrackingPhase::kPhase1 ? model : relaxed;
      candidates = filter_cameras(active, c_q, f_q, f_curr, roster);
      candidates.insert(c_q);  // the query may still be on the same camera
    }

    const bool replaying = f_curr <= frontier;
    if (replaying) {
      in_episode = true;
      ++episode_steps;
      ++res.replay_steps;
    } else {
      frontier = f_curr;
    }

    bool score_this = true;
    if (replaying && config.replay_mode == ReplayMode::kSkip &&
        (f_curr - f_q) % config.replay_param != 0) {
      score_this = false;  // skip-frame replay samples every stride-th frame
    }

    if (score_this) {
      std::vector<DetectionEvent> gallery;
      for (CameraId c : candidates) {
        if (config.dedup_scored && scored.count({c, f_curr})) continue;
        for (const DetectionEvent* det : streams.at(c, f_curr)) {
          gallery.push_back(*det);
        }
        ++res.frames_processed;
        ++res.frames_by_phase[static_cast<std::size_t>(phase_index())];
        if (config.dedup_scored) scored.insert({c, f_curr});
      }
      res.detections_scored += static_cast<std::int64_t>(gallery.size());
      if (replaying) ++res.replay_steps_scored;

      const std::vector<RankedMatch> ranked = rank_gallery(q_feat, gallery);
      if (auto match = decide_match(ranked, config.match_thresh)) {
        const bool via_replay = phase != TrackingPhase::kPhase1;
        res.matches.push_back({match->detection, match->distance, phase, via_replay});
        if (via_replay) res.any_replay_match = true;
        res.events.push_back(
            {"feedback", match->detection.camera, f_curr, "match"});
        settle_episode();
        q_feat = update_representation(q_feat, match->detection.feature, config.alpha);
        f_q = f_curr;
        c_q = match->detection.camera;
        frontier = std::max(frontier, f_curr);
        phase = TrackingPhase::kPhase1;
        f_curr = f_q + 1;
        continue;
      }
    }

    ++f_curr;
    if (config.mode == SchemeMode::kRexcam) {
      if (phase == TrackingPhase::kPhase1 &&
          windows_closed(model, c_q, f_q, f_curr, n_cameras)) {
        phase = TrackingPhase::kPhase2;
        in_episode = true;
        res.events.push_back({"trigger", c_q, f_curr, "phase2"});
        f_curr = f_q + 1;
      } else if (phase == TrackingPhase::kPhase2 &&
                 windows_closed(relaxed, c_q, f_q, f_curr, n_cameras)) {
        phase = TrackingPhase::kFullNetwork;
        res.events.push_back({"trigger", c_q, f_curr, "full_network"});
        f_curr = f_q + 1;
      }
    }
  }
  return res;
}

std::vector<TrackResult> run_workload(const DetectionStreams& streams,
                                      const CameraNetwork& network,
                                      const SpatioTemporalModel& model,
                                      const std::vector<QuerySpec>& queries,
                                      const TrackingConfig& config, int n_threads) {
  std::vector<TrackResult> results(queries.size());
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      results[i] = track_query(streams, network, model, queries[i], config);
      results[i].query_id = static_cast<int>(i);
    }
  };
  if (n_threads <= 1 || queries.size() <= 1) {
    run_range(0, queries.size());
    return results;
  }
  const std::size_t chunk =
      (queries.size() + static_cast<std::size_t>(n_threads) - 1) /
      static_cast<std::size_t>(n_threads);
  std::vector<std::future<void>> futures;
  for (std::size_t begin = 0; begin < queries.size(); begin += chunk) {
    const std::size_t end = std::min(begin + chunk, queries.size());
    futures.push_back(std::async(std::launch::async, run_range, begin, end));
  }
  for (auto& f : futures) f.get();
  return results;
}

int threads_from_env() {
  const char* value = std::getenv("REXCAM_THREADS");
  if (value == nullptr) return 1;
  const int n = std::atoi(value);
  return n > 0 ? n : 1;
}

}  // namespace rexcam
