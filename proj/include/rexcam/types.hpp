#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rexcam {

using CameraId = std::int32_t;
using FrameIndex = std::int64_t;
using EntityId = std::int64_t;
using DetectionId = std::int64_t;

// Feature embeddings are dense real vectors; all math on them goes through Eigen.
using FeatureVector = Eigen::VectorXd;

// Sentinel destination for transitions that leave the network.
inline constexpr CameraId kExitCamera = -1;

using CameraPair = std::pair<CameraId, CameraId>;

// One sighting of an entity on one camera at one frame. truth_entity is
// populated only by the simulator and is used for scoring, never by the tracker.
struct DetectionEvent {
  CameraId camera = 0;
  FrameIndex frame = 0;
  DetectionId detection_id = 0;
  FeatureVector feature;
  std::optional<EntityId> truth_entity;
};

// Ground-truth tuple (camera, frame, entity), the MTMC-tracker output format.
struct LabeledDetection {
  CameraId camera = 0;
  FrameIndex frame = 0;
  EntityId entity = 0;
};

struct QuerySpec {
  FeatureVector query_feature;
  CameraId query_camera = 0;
  FrameIndex query_frame = 0;
  std::optional<EntityId> truth_entity;  // scoring only
};

struct RankedMatch {
  DetectionEvent detection;
  double distance = 0.0;
};

}  // namespace rexcam
