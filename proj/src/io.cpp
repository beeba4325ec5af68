#include "rexcam/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace rexcam {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json detection_to_json(const DetectionEvent& det) {
  ordered_json rec;
  rec["camera"] = det.camera;
  rec["frame"] = det.frame;
  rec["detection_id"] = det.detection_id;
  std::vector<double> feature(det.feature.data(), det.feature.data() + det.feature.size());
  rec["feature"] = feature;
  if (det.truth_entity) {
    rec["truth_entity"] = *det.truth_entity;
  } else {
    rec["truth_entity"] = nullptr;
  }
  return rec;
}

DetectionEvent detection_from_json(const json& rec) {
  DetectionEvent det;
  det.camera = rec.at("camera").get<CameraId>();
  det.frame = rec.at("frame").get<FrameIndex>();
  det.detection_id = rec.at("detection_id").get<DetectionId>();
  const auto values = rec.at("feature").get<std::vector<double>>();
  det.feature = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
  if (!rec.at("truth_entity").is_null()) {
    det.truth_entity = rec.at("truth_entity").get<EntityId>();
  }
  return det;
}

}  // namespace

std::string detections_to_jsonl(const DetectionStreams& streams) {
  // Global (frame, camera, detection_id) order so output is reproducible.
  std::vector<const DetectionEvent*> all;
  for (const auto& [cam, stream] : streams.by_camera) {
    for (const DetectionEvent& det : stream) all.push_back(&det);
  }
  std::sort(all.begin(), all.end(),
            [](const DetectionEvent* a, const DetectionEvent* b) {
              if (a->frame != b->frame) return a->frame < b->frame;
              if (a->camera != b->camera) return a->camera < b->camera;
              return a->detection_id < b->detection_id;
            });
  std::ostringstream out;
  for (const DetectionEvent* det : all) out << detection_to_json(*det).dump() << '\n';
  return out.str();
}

std::vector<DetectionEvent> detections_from_jsonl(const std::string& text) {
  std::vector<DetectionEvent> detections;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      detections.push_back(detection_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error("detections line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return detections;
}

DetectionStreams streams_from_detections(std::vector<DetectionEvent> detections,
                                         int n_cameras) {
  DetectionStreams streams;
  for (DetectionEvent& det : detections) {
    streams.horizon = std::max(streams.horizon, det.frame);
    streams.by_camera[det.camera].push_back(std::move(det));
  }
  for (CameraId c = 0; c < n_cameras; ++c) streams.by_camera[c];
  for (auto& [cam, stream] : streams.by_camera) {
    std::sort(stream.begin(), stream.end(),
              [](const DetectionEvent& a, const DetectionEvent& b) {
                if (a.frame != b.frame) return a.frame < b.frame;
                return a.detection_id < b.detection_id;
              });
  }
  return streams;
}

std::string labels_to_jsonl(std::span<const LabeledDetection> labels) {
  std::ostringstream out;
  for (const LabeledDetection& label : labels) {
    ordered_json rec;
    rec["camera"] = label.camera;
    rec["frame"] = label.frame;
    rec["entity"] = label.entity;
    out << rec.dump() << '\n';
  }
  return out.str();
}

std::vector<LabeledDetection> labels_from_jsonl(const std::string& text) {
  std::vector<LabeledDetection> labels;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      labels.push_back({rec.at("camera").get<CameraId>(),
                        rec.at("frame").get<FrameIndex>(),
                        rec.at("entity").get<EntityId>()});
    } catch (const json::exception& e) {
      throw std::runtime_error("labels line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return labels;
}

std::string network_to_json(const CameraNetwork& network) {
  ordered_json doc;
  doc["frame_rate"] = network.frame_rate;
  ordered_json cams = ordered_json::array();
  for (const Camera& cam : network.cameras) {
    ordered_json rec;
    rec["id"] = cam.id;
    rec["x"] = cam.x;
    rec["y"] = cam.y;
    rec["fov_half_len"] = cam.fov_half_len;
    cams.push_back(std::move(rec));
  }
  doc["cameras"] = std::move(cams);
  return doc.dump(2);
}

CameraNetwork network_from_json(const std::string& text) {
  const json doc = json::parse(text);
  CameraNetwork network;
  network.frame_rate = doc.at("frame_rate").get<double>();
  for (const json& rec : doc.at("cameras")) {
    Camera cam;
    cam.id = rec.at("id").get<CameraId>();
    cam.x = rec.at("x").get<double>();
    cam.y = rec.at("y").get<double>();
    cam.fov_half_len = rec.at("fov_half_len").get<double>();
    network.cameras.push_back(cam);
  }
  return network;
}

std::string track_results_to_json(std::span<const TrackResult> results) {
  ordered_json arr = ordered_json::array();
  for (const TrackResult& res : results) {
    ordered_json rec;
    rec["query_id"] = res.query_id;
    ordered_json matches = ordered_json::array();
    for (const MatchRecord& m : res.matches) {
      ordered_json mr;
      mr["camera"] = m.detection.camera;
      mr["frame"] = m.detection.frame;
      mr["detection_id"] = m.detection.detection_id;
      mr["distance"] = m.distance;
      mr["phase_found"] = static_cast<int>(m.phase_found);
      mr["was_replay"] = m.was_replay;
      matches.push_back(std::move(mr));
    }
    rec["matches"] = std::move(matches);
    rec["frames_processed"] = res.frames_processed;
    rec["detections_scored"] = res.detections_scored;
    rec["delay_frames"] = res.delay_frames;
    if (res.exit_declared_at) {
      rec["exit_declared_at"] = *res.exit_declared_at;
    } else {
      rec["exit_declared_at"] = nullptr;
    }
    arr.push_back(std::move(rec));
  }
  return arr.dump(2);
}

std::string track_events_to_jsonl(std::span<const TrackEvent> events) {
  std::ostringstream out;
  for (const TrackEvent& ev : events) {
    ordered_json rec;
    rec["kind"] = ev.kind;
    rec["camera"] = ev.camera;
    rec["frame"] = ev.frame;
    rec["payload"] = ev.payload;
    out << rec.dump() << '\n';
  }
  return out.str();
}

std::string detection_report_to_json(const DetectionReport& report) {
  ordered_json doc;
  doc["found"] = report.found;
  if (report.found) {
    doc["camera"] = report.camera;
    doc["frame"] = report.frame;
  } else {
    doc["camera"] = nullptr;
    doc["frame"] = nullptr;
  }
  doc["cells_searched"] = report.cells_searched;
  doc["cells_total"] = report.cells_total;
  return doc.dump(2);
}

std::string manifest_to_json(const RunManifest& manifest) {
  ordered_json doc;
  doc["command"] = manifest.command;
  doc["tool_version"] = manifest.tool_version;
  doc["seed"] = manifest.seed;
  doc["config_hash"] = manifest.config_hash;
  doc["inputs"] = manifest.inputs;
  doc["outputs"] = manifest.outputs;
  doc["wall_clock_s"] = manifest.wall_clock_s;
  return doc.dump(2);
}

std::string config_hash(const std::string& canonical_text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : canonical_text) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("rename failed for " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace rexcam
