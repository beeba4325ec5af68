#pragma once

#include <span>
#include <string>
#include <vector>

#include "rexcam/identity_detection.hpp"
#include "rexcam/simulator.hpp"
#include "rexcam/tracking.hpp"
#include "rexcam/types.hpp"

namespace rexcam {

// JSON-lines codecs. One record per line, stable field order.
std::string detections_to_jsonl(const DetectionStreams& streams);
std::vector<DetectionEvent> detections_from_jsonl(const std::string& text);
DetectionStreams streams_from_detections(std::vector<DetectionEvent> detections,
                                         int n_cameras);

std::string labels_to_jsonl(std::span<const LabeledDetection> labels);
std::vector<LabeledDetection> labels_from_jsonl(const std::string& text);

std::string network_to_json(const CameraNetwork& network);
CameraNetwork network_from_json(const std::string& text);

std::string track_results_to_json(std::span<const TrackResult> results);
std::string track_events_to_jsonl(std::span<const TrackEvent> events);
std::string detection_report_to_json(const DetectionReport& report);

// Run manifest written next to every command's output.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;
};

std::string manifest_to_json(const RunManifest& manifest);

// FNV-1a over the canonical config text, rendered as 16 hex digits.
std::string config_hash(const std::string& canonical_text);

// Write-temp-then-rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace rexcam
