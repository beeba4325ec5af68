#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rexcam/types.hpp"

namespace rexcam {

// Euclidean distance between two feature vectors of equal dimension.
double feature_distance(const FeatureVector& a, const FeatureVector& b);

// Ranks the gallery by ascending distance to the query feature.
// Ties are broken by ascending detection_id so the output is deterministic.
std::vector<RankedMatch> rank_gallery(const FeatureVector& query_feature,
                                      std::span<const DetectionEvent> gallery);

// Converts a ranking into a binary match decision: the top entry is accepted
// iff its distance is strictly below match_thresh.
std::optional<RankedMatch> decide_match(std::span<const RankedMatch> ranked,
                                        double match_thresh);

// Exponential moving average of the query representation.
// alpha = 0 keeps the current representation, alpha = 1 replaces it.
FeatureVector update_representation(const FeatureVector& current,
                                    const FeatureVector& matched, double alpha);

}  // namespace rexcam
