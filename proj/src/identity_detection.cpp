#include "rexcam/identity_detection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rexcam/reid.hpp"

namespace rexcam {

EntryPriors estimate_entry_priors(std::span<const LabeledDetection> labels) {
  if (labels.empty()) {
    throw std::invalid_argument("estimate_entry_priors: empty label set");
  }
  std::map<EntityId, LabeledDetection> first_sighting;
  for (const LabeledDetection& label : labels) {
    auto [it, inserted] = first_sighting.try_emplace(label.entity, label);
    if (!inserted && (label.frame < it->second.frame ||
                      (label.frame == it->second.frame &&
                       label.camera < it->second.camera))) {
      it->second = label;
    }
  }
  EntryPriors priors;
  for (const auto& [entity, label] : first_sighting) {
    priors[label.camera] += 1.0;
  }
  const double total = static_cast<double>(first_sighting.size());
  for (auto& [camera, count] : priors) count /= total;
  return priors;
}

void BeliefState::ensure_window(int w) {
  while (static_cast<int>(scores.size()) <= w) {
    scores.emplace_back(static_cast<std::size_t>(n_cameras), 0.0);
    searched.emplace_back(static_cast<std::size_t>(n_cameras), false);
  }
}

bool BeliefState::is_searched(int c, int w) const {
  if (w >= static_cast<int>(searched.size())) return false;
  return searched[static_cast<std::size_t>(w)][static_cast<std::size_t>(c)];
}

namespace {

// Mass of the pair's travel-time histogram landing k windows ahead.
double window_mass(const SpatioTemporalModel& model, CameraId src, CameraId dst,
                   int k, FrameIndex window_len) {
  auto it = model.temporal.find({src, dst});
  if (it == model.temporal.end() || it->second.total() == 0) return 0.0;
  const double lo = static_cast<double>(k) * static_cast<double>(window_len);
  const double hi = lo + static_cast<double>(window_len);
  return static_cast<double>(it->second.count_in_window(lo, hi)) /
         static_cast<double>(it->second.total());
}

double prior_of(const EntryPriors& priors, CameraId c) {
  auto it = priors.find(c);
  return it == priors.end() ? 0.0 : it->second;
}

}  // namespace

void propagate(BeliefState& state, const SpatioTemporalModel& model, int w) {
  state.ensure_window(w);

  // Contributions from strictly earlier windows first; same-window hops are
  // then routed through those base scores so the result is order-free.
  std::vector<double> base(static_cast<std::size_t>(state.n_cameras), 0.0);
  for (int c = 0; c < state.n_cameras; ++c) {
    double score = prior_of(state.priors, c);
    for (int wj = 0; wj < w; ++wj) {
      for (int ci = 0; ci < state.n_cameras; ++ci) {
        if (state.is_searched(ci, wj)) continue;
        const double mass = window_mass(model, ci, c, w - wj, state.window_len);
        if (mass == 0.0) continue;
        score += state.scores[static_cast<std::size_t>(wj)]
                             [static_cast<std::size_t>(ci)] *
                 spatial_degree(model, ci, c) * mass;
      }
    }
    base[static_cast<std::size_t>(c)] = score;
  }
  for (int c = 0; c < state.n_cameras; ++c) {
    double score = base[static_cast<std::size_t>(c)];
    for (int ci = 0; ci < state.n_cameras; ++ci) {
      if (ci == c || state.is_searched(ci, w)) continue;
      const double mass = window_mass(model, ci, c, 0, state.window_len);
      if (mass == 0.0) continue;
      score += base[static_cast<std::size_t>(ci)] * spatial_degree(model, ci, c) * mass;
    }
    state.scores[static_cast<std::size_t>(w)][static_cast<std::size_t>(c)] = score;
  }
}

DetectionSchedule schedule_search(const BeliefState& state, double theta, int w) {
  if (w >= static_cast<int>(state.scores.size())) {
    throw std::logic_error("schedule_search: window not yet propagated");
  }
  DetectionSchedule schedule;
  for (int c = 0; c < state.n_cameras; ++c) {
    if (state.is_searched(c, w)) continue;
    if (state.scores[static_cast<std::size_t>(w)][static_cast<std::size_t>(c)] > theta) {
      schedule.targets.push_back(c);
    }
  }
  return schedule;
}

DetectionReport detect_identity(const DetectionStreams& streams,
                                const SpatioTemporalModel& model,
                                const EntryPriors& priors, double theta,
                                const FeatureVector& query_feature,
                                double match_thresh, FrameIndex window_len) {
  if (window_len <= 0) {
    throw std::invalid_argument("detect_identity: window_len must be positive");
  }
  BeliefState state;
  state.n_cameras = model.n_cameras;
  state.window_len = window_len;
  state.priors = priors;

  const int n_windows = static_cast<int>(streams.horizon / window_len) + 1;
  DetectionReport report;
  report.cells_total = static_cast<std::int64_t>(n_windows) * model.n_cameras;

  for (int w = 0; w < n_windows; ++w) {
    propagate(state, model, w);
    const DetectionSchedule schedule = schedule_search(state, theta, w);
    report.cells_searched += static_cast<std::int64_t>(schedule.targets.size());

    const FrameIndex first = static_cast<FrameIndex>(w) * window_len;
    const FrameIndex last = std::min(first + window_len - 1, streams.horizon);
    for (FrameIndex f = first; f <= last; ++f) {
      for (CameraId c : schedule.targets) {
        std::vector<DetectionEvent> gallery;
        for (const DetectionEvent* det : streams.at(c, f)) gallery.push_back(*det);
        const auto ranked = rank_gallery(query_feature, gallery);
        if (auto match = decide_match(ranked, match_thresh)) {
          report.found = true;
          report.camera = match->detection.camera;
          report.frame = match->detection.frame;
          return report;
        }
      }
    }
    for (CameraId c : schedule.targets) {
      state.searched[static_cast<std::size_t>(w)][static_cast<std::size_t>(c)] = true;
    }
  }
  return report;
}

double score_quantile(std::vector<double> scores, double q) {
  if (scores.empty()) {
    throw std::invalid_argument("score_quantile: empty score list");
  }
  std::sort(scores.begin(), scores.end());
  const double pos = q * static_cast<double>(scores.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return scores[lo] * (1.0 - frac) + scores[hi] * frac;
}

}  // namespace rexcam
