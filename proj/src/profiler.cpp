#include "rexcam/profiler.hpp"

#include <algorithm>
#include <iostream>
#include <map>

namespace rexcam {

std::vector<CameraVisit> segment_visits(std::span<const LabeledDetection> labels,
                                        FrameIndex gap_thresh) {
  std::map<EntityId, std::vector<LabeledDetection>> by_entity;
  for (const LabeledDetection& label : labels) {
    by_entity[label.entity].push_back(label);
  }

  std::vector<CameraVisit> visits;
  bool warned_overlap = false;
  for (auto& [entity, sightings] : by_entity) {
    std::sort(sightings.begin(), sightings.end(),
              [](const LabeledDetection& a, const LabeledDetection& b) {
                if (a.frame != b.frame) return a.frame < b.frame;
                return a.camera < b.camera;
              });
    CameraVisit current{entity, sightings.front().camera,
                        sightings.front().frame, sightings.front().frame};
    for (std::size_t i = 1; i < sightings.size(); ++i) {
      const LabeledDetection& s = sightings[i];
      if (s.camera == current.camera && s.frame - current.last_frame <= gap_thresh) {
        current.last_frame = std::max(current.last_frame, s.frame);
        continue;
      }
      // Simultaneous visibility on two cameras: keep the current camera for
      // same-frame sightings elsewhere, so the later-running visit wins.
      if (s.camera != current.camera && s.frame <= current.last_frame) {
        if (!warned_overlap) {
          std::cerr << "warning: overlapping camera visibility for entity "
                    << entity << " at frame " << s.frame << "\n";
          warned_overlap = true;
        }
        if (s.frame == current.last_frame) continue;
      }
      visits.push_back(current);
      current = CameraVisit{entity, s.camera, s.frame, s.frame};
    }
    visits.push_back(current);
  }
  return visits;
}

std::vector<TransitionRecord> extract_transitions(
    std::span<const LabeledDetection> labels, FrameIndex gap_thresh) {
  const std::vector<CameraVisit> visits = segment_visits(labels, gap_thresh);

  std::map<EntityId, std::vector<const CameraVisit*>> by_entity;
  for (const CameraVisit& v : visits) by_entity[v.entity].push_back(&v);

  std::vector<TransitionRecord> records;
  for (auto& [entity, chain] : by_entity) {
    std::sort(chain.begin(), chain.end(),
              [](const CameraVisit* a, const CameraVisit* b) {
                return a->first_frame < b->first_frame;
              });
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      TransitionRecord rec;
      rec.entity = entity;
      rec.src = chain[i]->camera;
      rec.dst = chain[i + 1]->camera;
      rec.depart_frame = chain[i]->last_frame;
      rec.delta = chain[i + 1]->first_frame - chain[i]->last_frame;
      records.push_back(rec);
    }
    TransitionRecord exit_rec;
    exit_rec.entity = entity;
    exit_rec.src = chain.back()->camera;
    exit_rec.dst = kExitCamera;
    exit_rec.depart_frame = chain.back()->last_frame;
    records.push_back(exit_rec);
  }
  return records;
}

SpatioTemporalModel build_model(std::span<const TransitionRecord> transitions,
                                double s_thresh, double t_thresh,
                                FrameIndex bin_width, int n_cameras) {
  SpatioTemporalModel model;
  model.s_thresh = s_thresh;
  model.t_thresh = t_thresh;
  model.bin_width = bin_width;
  model.n_cameras = n_cameras;
  for (const TransitionRecord& rec : transitions) {
    if (rec.dst == kExitCamera) {
      ++model.spatial.exit_counts[rec.src];
      continue;
    }
    ++model.spatial.counts[{rec.src, rec.dst}];
    auto [it, inserted] = model.temporal.try_emplace(CameraPair{rec.src, rec.dst});
    if (inserted) it->second.bin_width = bin_width;
    it->second.add(rec.delta);
  }
  return model;
}

std::vector<LabeledDetection> sample_labels(std::span<const LabeledDetection> labels,
                                            int keep_count, int stride_base) {
  std::vector<LabeledDetection> kept;
  for (const LabeledDetection& label : labels) {
    if (label.frame % stride_base < keep_count) kept.push_back(label);
  }
  return kept;
}

DriftMonitor::DriftMonitor(std::size_t window_len, double spike_factor)
    : window_len_(window_len), spike_factor_(spike_factor) {}

void DriftMonitor::record_outcome(bool was_pruning_miss) {
  window_.push_back(was_pruning_miss);
  if (window_.size() > window_len_) window_.pop_front();
  if (baseline_rate_ < 0.0 && window_.size() == window_len_) {
    baseline_rate_ = window_rate();
  }
}

double DriftMonitor::window_rate() const {
  if (window_.empty()) return 0.0;
  std::size_t misses = 0;
  for (bool b : window_) misses += b ? 1 : 0;
  return static_cast<double>(misses) / static_cast<double>(window_.size());
}

bool DriftMonitor::should_reprofile() const {
  if (baseline_rate_ < 0.0 || window_.size() < window_len_) return false;
  return window_rate() > spike_factor_ * baseline_rate_;
}

}  // namespace rexcam
