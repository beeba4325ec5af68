#include "rexcam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rexcam {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  return std::mt19937_64(seq);
}

FrameIndex frames_from_seconds(double seconds, double frame_rate) {
  return static_cast<FrameIndex>(std::llround(seconds * frame_rate));
}

FeatureVector random_unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  FeatureVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  const double norm = v.norm();
  return norm > 0.0 ? FeatureVector(v / norm) : v;
}

}  // namespace

double CameraNetwork::distance(CameraId a, CameraId b) const {
  const Camera& ca = cameras.at(static_cast<std::size_t>(a));
  const Camera& cb = cameras.at(static_cast<std::size_t>(b));
  return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

Layout layout_from_string(const std::string& name) {
  if (name == "line") return Layout::kLine;
  if (name == "grid") return Layout::kGrid;
  if (name == "random") return Layout::kRandom;
  throw std::invalid_argument("unknown layout: " + name);
}

std::string layout_to_string(Layout layout) {
  switch (layout) {
    case Layout::kLine: return "line";
    case Layout::kGrid: return "grid";
    case Layout::kRandom: return "random";
  }
  return "grid";
}

NetworkAndGraph generate_network(const NetworkConfig& config) {
  if (config.n_cameras < 2) {
    throw std::invalid_argument("generate_network: need at least 2 cameras");
  }
  NetworkAndGraph out;
  out.network.frame_rate = config.frame_rate;

  auto rng = make_rng(config.seed, 0x6e657477);
  const int n = config.n_cameras;
  for (int i = 0; i < n; ++i) {
    Camera cam;
    cam.id = i;
    cam.fov_half_len = config.fov_half_len;
    switch (config.layout) {
      case Layout::kLine:
        cam.x = i * config.spacing_m;
        cam.y = 0.0;
        break;
      case Layout::kGrid: {
        const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        cam.x = (i % cols) * config.spacing_m;
        cam.y = (i / cols) * config.spacing_m;
        break;
      }
      case Layout::kRandom: {
        std::uniform_real_distribution<double> pos(
            0.0, config.spacing_m * std::sqrt(static_cast<double>(n)));
        cam.x = pos(rng);
        cam.y = pos(rng);
        break;
      }
    }
    out.network.cameras.push_back(cam);
  }

  const double neighbor_radius =
      config.layout == Layout::kRandom ? config.spacing_m * 1.8 : config.spacing_m * 1.01;
  for (int s = 0; s < n; ++s) {
    std::vector<int> neighbors;
    for (int d = 0; d < n; ++d) {
      if (d == s) continue;
      if (out.network.distance(s, d) <= neighbor_radius) neighbors.push_back(d);
    }
    const double exit_p = neighbors.empty() ? 1.0 : config.exit_prob;
    out.graph.exit_prob[s] = exit_p;
    for (int d : neighbors) {
      MobilityEdge edge;
      edge.probability = (1.0 - exit_p) / static_cast<double>(neighbors.size());
      edge.travel_mean_s = out.network.distance(s, d) / config.walk_speed_mps;
      edge.travel_std_s = 0.23 * edge.travel_mean_s;
      out.graph.edges[{s, d}] = edge;
    }
    out.graph.entry_weights[s] = 1.0 / static_cast<double>(n);
  }
  return out;
}

std::vector<LabeledDetection> generate_truth(const CameraNetwork& network,
                                             const MobilityGraph& graph,
                                             const SimulationConfig& config) {
  auto rng = make_rng(config.seed, 0x74727574);
  const double fps = network.frame_rate;
  const FrameIndex horizon = frames_from_seconds(config.duration_s, fps);

  // Entry camera sampler from the (possibly caller-adjusted) entry weights.
  std::vector<CameraId> entry_cams;
  std::vector<double> entry_w;
  for (const auto& [cam, w] : graph.entry_weights) {
    entry_cams.push_back(cam);
    entry_w.push_back(w);
  }

  std::vector<LabeledDetection> truth;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::discrete_distribution<std::size_t> entry_dist(entry_w.begin(), entry_w.end());

  for (EntityId e = 0; e < config.n_entities; ++e) {
    FrameIndex t = static_cast<FrameIndex>(unit(rng) * 0.7 * static_cast<double>(horizon));
    CameraId cam = entry_cams[entry_dist(rng)];
    while (t < horizon) {
      std::normal_distribution<double> dwell_dist(config.dwell_mean_s,
                                                  0.3 * config.dwell_mean_s);
      const FrameIndex dwell =
          std::max<FrameIndex>(1, frames_from_seconds(dwell_dist(rng), fps));
      const FrameIndex visit_end = std::min<FrameIndex>(t + dwell - 1, horizon - 1);
      for (FrameIndex f = t; f <= visit_end; ++f) {
        truth.push_back({cam, f, e});
      }
      if (visit_end == horizon - 1) break;

      // Next hop: exit or a mobility edge out of the current camera.
      double u = unit(rng);
      const double exit_p = graph.exit_prob.count(cam) ? graph.exit_prob.at(cam) : 1.0;
      if (u < exit_p) break;
      u -= exit_p;
      CameraId next = kExitCamera;
      MobilityEdge chosen;
      for (const auto& [pair, edge] : graph.edges) {
        if (pair.first != cam) continue;
        if (u < edge.probability) {
          next = pair.second;
          chosen = edge;
          break;
        }
        u -= edge.probability;
      }
      if (next == kExitCamera) break;  // numeric remainder: treat as exit

      std::normal_distribution<double> travel(chosen.travel_mean_s, chosen.travel_std_s);
      const FrameIndex delta =
          std::max<FrameIndex>(1, frames_from_seconds(travel(rng), fps));
      t = visit_end + delta;
      cam = next;
    }
  }
  std::sort(truth.begin(), truth.end(),
            [](const LabeledDetection& a, const LabeledDetection& b) {
              if (a.frame != b.frame) return a.frame < b.frame;
              if (a.camera != b.camera) return a.camera < b.camera;
              return a.entity < b.entity;
            });
  return truth;
}

std::vector<const DetectionEvent*> DetectionStreams::at(CameraId camera,
                                                        FrameIndex frame) const {
  std::vector<const DetectionEvent*> out;
  auto it = by_camera.find(camera);
  if (it == by_camera.end()) return out;
  const std::vector<DetectionEvent>& stream = it->second;
  auto lo = std::lower_bound(stream.begin(), stream.end(), frame,
                             [](const DetectionEvent& d, FrameIndex f) {
                               return d.frame < f;
                             });
  for (; lo != stream.end() && lo->frame == frame; ++lo) out.push_back(&*lo);
  return out;
}

DetectionStreams synthesize_detections(std::span<const LabeledDetection> truth,
                                       const CameraNetwork& network,
                                       const SimulationConfig& config) {
  DetectionStreams streams;
  auto feat_rng = make_rng(config.seed, 0x66656174);
  auto noise_rng = make_rng(config.seed, 0x6e6f6973);
  auto distractor_rng = make_rng(config.seed, 0x64697374);

  FrameIndex horizon = frames_from_seconds(config.duration_s, network.frame_rate);
  for (const LabeledDetection& label : truth) {
    horizon = std::max(horizon, label.frame + 1);
  }
  streams.horizon = horizon - 1;

  // Latent features are drawn in ascending entity order so they do not depend
  // on trajectory details.
  std::vector<EntityId> entities;
  for (const LabeledDetection& label : truth) entities.push_back(label.entity);
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  for (EntityId e : entities) {
    streams.latent_features[e] = random_unit_vector(config.feature_dim, feat_rng);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DetectionId next_id = 0;
  std::vector<DetectionEvent> all;
  for (const LabeledDetection& label : truth) {  // already (frame, camera) sorted
    if (config.miss_prob > 0.0 && unit(noise_rng) < config.miss_prob) continue;
    DetectionEvent det;
    det.camera = label.camera;
    det.frame = label.frame;
    det.detection_id = next_id++;
    det.truth_entity = label.entity;
    FeatureVector f = streams.latent_features.at(label.entity);
    if (config.feature_noise_sigma > 0.0) {
      for (int i = 0; i < f.size(); ++i) {
        f[i] += config.feature_noise_sigma * gauss(noise_rng);
      }
    }
    det.feature = std::move(f);
    all.push_back(std::move(det));
  }

  if (config.distractor_rate > 0.0) {
    // Distractors are hard negatives: perturbed copies of real identities,
    // close enough in feature space to cause false-positive matches. With
    // persistent_distractors a small pool of stable impostor identities is
    // reused; otherwise every distractor detection is an independent draw.
    const double impostor_sigma = config.feature_noise_sigma > 0.0
                                      ? 1.2 * config.feature_noise_sigma
                                      : 0.25;
    std::vector<FeatureVector> pool;
    if (config.persistent_distractors && !entities.empty()) {
      const std::size_t pool_size = std::max<std::size_t>(entities.size() / 10, 1);
      std::uniform_int_distribution<std::size_t> pick(0, entities.size() - 1);
      for (std::size_t i = 0; i < pool_size; ++i) {
        FeatureVector f = streams.latent_features.at(entities[pick(distractor_rng)]);
        for (int j = 0; j < f.size(); ++j) {
          f[j] += impostor_sigma * gauss(distractor_rng);
        }
        pool.push_back(std::move(f));
      }
    }
    std::poisson_distribution<int> n_distractors(config.distractor_rate);
    for (const Camera& cam : network.cameras) {
      for (FrameIndex f = 0; f < horizon; ++f) {
        const int k = n_distractors(distractor_rng);
        for (int i = 0; i < k; ++i) {
          DetectionEvent det;
          det.camera = cam.id;
          det.frame = f;
          det.detection_id = next_id++;
          if (!pool.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            FeatureVector base = pool[pick(distractor_rng)];
            for (int j = 0; j < base.size(); ++j) {
              base[j] += config.feature_noise_sigma * gauss(distractor_rng);
            }
            det.feature = std::move(base);
          } else if (!entities.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, entities.size() - 1);
            FeatureVector base =
                streams.latent_features.at(entities[pick(distractor_rng)]);
            for (int j = 0; j < base.size(); ++j) {
              base[j] += impostor_sigma * gauss(distractor_rng);
            }
            det.feature = std::move(base);
          } else {
            det.feature = random_unit_vector(config.feature_dim, distractor_rng);
          }
          all.push_back(std::move(det));
        }
      }
    }
  }

  std::sort(all.begin(), all.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    if (a.camera != b.camera) return a.camera < b.camera;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.detection_id < b.detection_id;
  });
  for (DetectionEvent& det : all) {
    streams.by_camera[det.camera].push_back(std::move(det));
  }
  // Cameras with no detections still get an (empty) stream entry.
  for (const Camera& cam : network.cameras) streams.by_camera[cam.id];
  return streams;
}

}  // namespace rexcam
