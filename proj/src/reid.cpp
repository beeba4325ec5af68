#include "rexcam/reid.hpp"

#include <algorithm>
#include <stdexcept>

namespace rexcam {

double feature_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("feature_distance: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  return (a - b).norm();
}

std::vector<RankedMatch> rank_gallery(const FeatureVector& query_feature,
                                      std::span<const DetectionEvent> gallery) {
  std::vector<RankedMatch> ranked;
  ranked.reserve(gallery.size());
  for (const DetectionEvent& det : gallery) {
    ranked.push_back({det, feature_distance(query_feature, det.feature)});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedMatch& lhs, const RankedMatch& rhs) {
              if (lhs.distance != rhs.distance) return lhs.distance < rhs.distance;
              return lhs.detection.detection_id < rhs.detection.detection_id;
            });
  return ranked;
}

std::optional<RankedMatch> decide_match(std::span<const RankedMatch> ranked,
                                        double match_thresh) {
  if (ranked.empty() || !(ranked.front().distance < match_thresh)) {
    return std::nullopt;
  }
  return ranked.front();
}

FeatureVector update_representation(const FeatureVector& current,
                                    const FeatureVector& matched, double alpha) {
  if (current.size() != matched.size()) {
    throw std::invalid_argument("update_representation: dimension mismatch");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("update_representation: alpha must be in [0,1]");
  }
  return (1.0 - alpha) * current + alpha * matched;
}

}  // namespace rexcam
