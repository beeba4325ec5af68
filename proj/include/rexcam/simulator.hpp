#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rexcam/types.hpp"

namespace rexcam {

struct Camera {
  CameraId id = 0;
  double x = 0.0;
  double y = 0.0;
  double fov_half_len = 50.0;  // square field of view, side 2 * fov_half_len
};

struct CameraNetwork {
  std::vector<Camera> cameras;
  double frame_rate = 10.0;

  double distance(CameraId a, CameraId b) const;
};

struct MobilityEdge {
  double probability = 0.0;
  double travel_mean_s = 0.0;
  double travel_std_s = 0.0;
};

// Ground-truth mobility: per source, edge probabilities plus exit_prob sum to 1.
struct MobilityGraph {
  std::map<CameraPair, MobilityEdge> edges;
  std::map<CameraId, double> exit_prob;
  std::map<CameraId, double> entry_weights;
};

enum class Layout { kLine, kGrid, kRandom };

struct NetworkConfig {
  int n_cameras = 8;
  Layout layout = Layout::kGrid;
  double spacing_m = 50.0;
  double frame_rate = 10.0;
  double walk_speed_mps = 1.4;
  double exit_prob = 0.2;
  double fov_half_len = 50.0;
  std::uint64_t seed = 0;
};

struct SimulationConfig {
  int n_entities = 100;
  double duration_s = 120.0;
  int feature_dim = 16;
  double feature_noise_sigma = 0.0;
  double distractor_rate = 0.0;  // expected distractors per camera frame
  double miss_prob = 0.0;
  double dwell_mean_s = 8.0;
  bool persistent_distractors = false;
  std::uint64_t seed = 0;
};

struct NetworkAndGraph {
  CameraNetwork network;
  MobilityGraph graph;
};

NetworkAndGraph generate_network(const NetworkConfig& config);

std::vector<LabeledDetection> generate_truth(const CameraNetwork& network,
                                             const MobilityGraph& graph,
                                             const SimulationConfig& config);

struct DetectionStreams {
  // Per camera, ordered by frame then detection_id.
  std::map<CameraId, std::vector<DetectionEvent>> by_camera;
  // Latent (noise-free) feature per entity, for query construction.
  std::map<EntityId, FeatureVector> latent_features;
  FrameIndex horizon = 0;  // last simulated frame index

  std::vector<const DetectionEvent*> at(CameraId camera, FrameIndex frame) const;
};

DetectionStreams synthesize_detections(std::span<const LabeledDetection> truth,
                                       const CameraNetwork& network,
                                       const SimulationConfig& config);

Layout layout_from_string(const std::string& name);
std::string layout_to_string(Layout layout);

}  // namespace rexcam
