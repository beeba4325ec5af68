// rexcam: synthetic cross-camera tracking experiments driven by a
// spatio-temporal correlation model. Subcommands: simulate, profile, track,
// detect, bench.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "rexcam/correlation_model.hpp"
#include "rexcam/identity_detection.hpp"
#include "rexcam/io.hpp"
#include "rexcam/metrics.hpp"
#include "rexcam/profiler.hpp"
#include "rexcam/simulator.hpp"
#include "rexcam/tracking.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void write_manifest(const std::string& out_dir, rexcam::RunManifest manifest,
                    const Timer& timer) {
  manifest.tool_version = kVersion;
  manifest.wall_clock_s = timer.seconds();
  rexcam::write_file_atomic((fs::path(out_dir) / "manifest.json").string(),
                            rexcam::manifest_to_json(manifest) + "\n");
}

struct SimSpec {
  rexcam::NetworkConfig net;
  rexcam::SimulationConfig sim;
};

SimSpec sim_spec_from_json(const json& doc) {
  SimSpec spec;
  spec.net.n_cameras = doc.value("n_cameras", spec.net.n_cameras);
  spec.net.layout = rexcam::layout_from_string(doc.value("layout", "grid"));
  spec.net.spacing_m = doc.value("spacing_m", spec.net.spacing_m);
  spec.net.frame_rate = doc.value("frame_rate", spec.net.frame_rate);
  spec.net.exit_prob = doc.value("exit_prob", spec.net.exit_prob);
  spec.net.fov_half_len = doc.value("fov_half_len", spec.net.fov_half_len);
  spec.sim.n_entities = doc.value("n_entities", spec.sim.n_entities);
  spec.sim.duration_s = doc.value("duration_s", spec.sim.duration_s);
  spec.sim.feature_dim = doc.value("feature_dim", spec.sim.feature_dim);
  spec.sim.feature_noise_sigma =
      doc.value("feature_noise_sigma", spec.sim.feature_noise_sigma);
  spec.sim.distractor_rate = doc.value("distractor_rate", spec.sim.distractor_rate);
  spec.sim.miss_prob = doc.value("miss_prob", spec.sim.miss_prob);
  spec.sim.dwell_mean_s = doc.value("dwell_mean_s", spec.sim.dwell_mean_s);
  spec.sim.seed = doc.value("seed", spec.sim.seed);
  spec.net.seed = spec.sim.seed;
  return spec;
}

rexcam::TrackingConfig tracking_config_from_flags(
    const rexcam::SchemeSpec& scheme, double match_thresh, double exit_t_s,
    double frame_rate, const std::string& replay) {
  rexcam::TrackingConfig tc;
  tc.mode = scheme.mode;
  tc.match_thresh = match_thresh;
  tc.exit_t = static_cast<rexcam::FrameIndex>(std::llround(exit_t_s * frame_rate));
  if (replay == "realtime") {
    tc.replay_mode = rexcam::ReplayMode::kRealtime;
  } else if (replay.rfind("skip", 0) == 0) {
    tc.replay_mode = rexcam::ReplayMode::kSkip;
    tc.replay_param = std::stoi(replay.substr(4));
  } else if (replay.rfind("ff", 0) == 0) {
    tc.replay_mode = rexcam::ReplayMode::kFastForward;
    tc.replay_param = std::stoi(replay.substr(2));
  } else {
    throw CLI::ValidationError("--replay", "expected realtime, skipN, or ffN");
  }
  return tc;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  Timer timer;
  const std::string config_text = rexcam::read_file(config_path);
  json doc = json::parse(config_text);
  if (seed_override) doc["seed"] = *seed_override;
  if (!doc.contains("seed")) doc["seed"] = 0;
  SimSpec spec = sim_spec_from_json(doc);

  const auto net = rexcam::generate_network(spec.net);
  const auto truth = rexcam::generate_truth(net.network, net.graph, spec.sim);
  const auto streams = rexcam::synthesize_detections(truth, net.network, spec.sim);

  fs::create_directories(out_dir);
  rexcam::write_file_atomic((fs::path(out_dir) / "detections.jsonl").string(),
                            rexcam::detections_to_jsonl(streams));
  rexcam::write_file_atomic((fs::path(out_dir) / "truth.jsonl").string(),
                            rexcam::labels_to_jsonl(truth));
  rexcam::write_file_atomic((fs::path(out_dir) / "network.json").string(),
                            rexcam::network_to_json(net.network) + "\n");

  rexcam::RunManifest manifest;
  manifest.command = "simulate";
  manifest.seed = spec.sim.seed;
  manifest.config_hash = rexcam::config_hash(doc.dump());
  manifest.inputs = {config_path};
  manifest.outputs = {"detections.jsonl", "truth.jsonl", "network.json"};
  write_manifest(out_dir, manifest, timer);
  std::cout << "simulate: " << truth.size() << " truth sightings, horizon frame "
            << streams.horizon << "\n";
  return 0;
}

int cmd_profile(const std::string& truth_path, int s_pct, int t_pct,
                const std::string& sample, double frame_rate,
                const std::string& out_model) {
  Timer timer;
  const auto labels = rexcam::labels_from_jsonl(rexcam::read_file(truth_path));
  if (labels.empty()) {
    std::cerr << "error: empty truth file\n";
    return 1;
  }
  int n_cameras = 0;
  for (const auto& label : labels) n_cameras = std::max(n_cameras, label.camera + 1);
  const auto gap = static_cast<rexcam::FrameIndex>(std::llround(2.0 * frame_rate));
  const auto bin_width = static_cast<rexcam::FrameIndex>(std::llround(frame_rate));
  const double s_thresh = s_pct / 100.0;
  const double t_thresh = t_pct / 100.0;

  std::vector<rexcam::LabeledDetection> used = labels;
  if (!sample.empty()) {
    const auto slash = sample.find('/');
    if (slash == std::string::npos) {
      std::cerr << "error: --sample expects k/stride, e.g. 4/8\n";
      return 1;
    }
    const int keep = std::stoi(sample.substr(0, slash));
    const int stride = std::stoi(sample.substr(slash + 1));
    used = rexcam::sample_labels(labels, keep, stride);
  }
  const auto transitions = rexcam::extract_transitions(used, gap);
  const auto model =
      rexcam::build_model(transitions, s_thresh, t_thresh, bin_width, n_cameras);
  rexcam::save_model(model, out_model);

  // Row-sum validation over sources with outgoing traffic.
  bool rows_ok = true;
  for (int src = 0; src < n_cameras; ++src) {
    if (model.spatial.total_departures(src) == 0) continue;
    double row = 0.0;
    for (int dst = 0; dst < n_cameras; ++dst) {
      row += rexcam::spatial_degree(model, src, dst);
    }
    row += static_cast<double>(model.spatial.exit_counts.count(src)
                                   ? model.spatial.exit_counts.at(src)
                                   : 0) /
           static_cast<double>(model.spatial.total_departures(src));
    if (std::abs(row - 1.0) > 1e-9) rows_ok = false;
  }
  std::cout << "row-sum validation: " << (rows_ok ? "pass" : "FAIL") << "\n";

  if (!sample.empty()) {
    // Agreement of the sampled model with the full model on a query grid.
    const auto full_model = rexcam::build_model(
        rexcam::extract_transitions(labels, gap), s_thresh, t_thresh, bin_width,
        n_cameras);
    std::int64_t agree = 0;
    std::int64_t total = 0;
    for (int cq = 0; cq < n_cameras; ++cq) {
      for (int cd = 0; cd < n_cameras; ++cd) {
        for (rexcam::FrameIndex delta = 1; delta <= 40 * bin_width;
             delta += bin_width) {
          ++total;
          if (rexcam::model_eval(model, cq, cd, 0, delta) ==
              rexcam::model_eval(full_model, cq, cd, 0, delta)) {
            ++agree;
          }
        }
      }
    }
    std::cout << "sampled-vs-full filter agreement: "
              << (100.0 * static_cast<double>(agree) / static_cast<double>(total))
              << "%\n";
  }

  const fs::path out_dir = fs::path(out_model).parent_path();
  rexcam::RunManifest manifest;
  manifest.command = "profile";
  manifest.config_hash = rexcam::config_hash(std::to_string(s_pct) + "," +
                                             std::to_string(t_pct) + "," + sample);
  manifest.inputs = {truth_path};
  manifest.outputs = {out_model};
  write_manifest(out_dir.empty() ? "." : out_dir.string(), manifest, timer);
  return rows_ok ? 0 : 1;
}

int cmd_track(const std::string& detections_path, const std::string& network_path,
              const std::string& model_path, const std::string& truth_path,
              const std::string& scheme_name, std::size_t n_queries,
              double match_thresh, double exit_t_s, const std::string& replay,
              double alpha, const std::string& out_dir) {
  Timer timer;
  const auto network = rexcam::network_from_json(rexcam::read_file(network_path));
  auto model = rexcam::load_model(model_path);
  if (model.n_cameras != static_cast<int>(network.cameras.size())) {
    std::cerr << "error: model covers " << model.n_cameras << " cameras, network has "
              << network.cameras.size() << "\n";
    return 1;
  }
  auto detections =
      rexcam::detections_from_jsonl(rexcam::read_file(detections_path));
  const auto streams = rexcam::streams_from_detections(
      std::move(detections), static_cast<int>(network.cameras.size()));

  const auto scheme = rexcam::parse_scheme(scheme_name);
  if (scheme.mode == rexcam::SchemeMode::kRexcam) {
    model.s_thresh = scheme.s_thresh;
    model.t_thresh = scheme.t_thresh;
    model.temporal_enabled = scheme.temporal_enabled;
  }
  if (match_thresh <= 0.0) {
    match_thresh = rexcam::calibrate_match_thresh(streams, 17);
    std::cout << "calibrated match_thresh = " << match_thresh << "\n";
  }
  auto tc = tracking_config_from_flags(scheme, match_thresh, exit_t_s,
                                       network.frame_rate, replay);
  tc.alpha = alpha;

  const auto queries = rexcam::make_queries(streams, n_queries);
  const auto results = rexcam::run_workload(streams, network, model, queries, tc,
                                            rexcam::threads_from_env());

  fs::create_directories(out_dir);
  rexcam::write_file_atomic((fs::path(out_dir) / "results.json").string(),
                            rexcam::track_results_to_json(results) + "\n");
  std::vector<rexcam::TrackEvent> events;
  for (const auto& res : results) {
    events.insert(events.end(), res.events.begin(), res.events.end());
  }
  rexcam::write_file_atomic((fs::path(out_dir) / "events.jsonl").string(),
                            rexcam::track_events_to_jsonl(events));

  std::vector<std::string> outputs = {"results.json", "events.jsonl"};
  if (!truth_path.empty()) {
    const auto truth = rexcam::labels_from_jsonl(rexcam::read_file(truth_path));
    const auto gap =
        static_cast<rexcam::FrameIndex>(std::llround(2.0 * network.frame_rate));
    const auto report =
        rexcam::score_results(results, queries, truth, network.frame_rate, gap);
    json rep;
    rep["scheme"] = scheme_name;
    rep["frames_processed"] = report.compute_cost;
    rep["detections_scored"] = report.detections_scored;
    rep["recall"] = report.recall;
    rep["precision"] = report.precision;
    rep["zero_retrieved"] = report.zero_retrieved;
    rep["mean_delay_s"] = report.mean_delay_s;
    rexcam::write_file_atomic((fs::path(out_dir) / "report.json").string(),
                              rep.dump(2) + "\n");
    outputs.push_back("report.json");
    std::cout << "scheme " << scheme_name << ": recall " << report.recall
              << ", precision " << report.precision << ", frames "
              << report.compute_cost << "\n";
  }

  rexcam::RunManifest manifest;
  manifest.command = "track";
  manifest.config_hash = rexcam::config_hash(scheme_name + "," + replay);
  manifest.inputs = {detections_path, network_path, model_path};
  manifest.outputs = outputs;
  write_manifest(out_dir, manifest, timer);
  return 0;
}

int cmd_detect(const std::string& detections_path, const std::string& network_path,
               const std::string& model_path, const std::string& truth_path,
               rexcam::EntityId query_entity, double theta, double match_thresh,
               double window_s, const std::string& out_dir) {
  Timer timer;
  const auto network = rexcam::network_from_json(rexcam::read_file(network_path));
  const auto model = rexcam::load_model(model_path);
  auto detections =
      rexcam::detections_from_jsonl(rexcam::read_file(detections_path));
  const auto streams = rexcam::streams_from_detections(
      std::move(detections), static_cast<int>(network.cameras.size()));
  const auto truth = rexcam::labels_from_jsonl(rexcam::read_file(truth_path));
  const auto priors = rexcam::estimate_entry_priors(truth);

  // Query feature: the entity's first observed detection.
  const rexcam::DetectionEvent* query_det = nullptr;
  for (const auto& [cam, stream] : streams.by_camera) {
    for (const auto& det : stream) {
      if (det.truth_entity == query_entity &&
          (query_det == nullptr || det.frame < query_det->frame)) {
        query_det = &det;
      }
    }
  }
  if (query_det == nullptr) {
    std::cerr << "error: entity " << query_entity << " has no detections\n";
    return 1;
  }
  const auto window_len =
      static_cast<rexcam::FrameIndex>(std::llround(window_s * network.frame_rate));
  const auto report = rexcam::detect_identity(streams, model, priors, theta,
                                              query_det->feature, match_thresh,
                                              window_len);
  fs::create_directories(out_dir);
  rexcam::write_file_atomic((fs::path(out_dir) / "detect_report.json").string(),
                            rexcam::detection_report_to_json(report) + "\n");
  std::cout << "detect: found=" << (report.found ? "true" : "false")
            << " cells_searched=" << report.cells_searched << "/"
            << report.cells_total << "\n";

  rexcam::RunManifest manifest;
  manifest.command = "detect";
  manifest.config_hash =
      rexcam::config_hash(std::to_string(theta) + "," + std::to_string(window_s));
  manifest.inputs = {detections_path, network_path, model_path, truth_path};
  manifest.outputs = {"detect_report.json"};
  write_manifest(out_dir, manifest, timer);
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              const std::string& format, std::optional<std::uint64_t> seed_override) {
  Timer timer;
  json doc = json::parse(rexcam::read_file(config_path));
  if (seed_override) doc["seed"] = *seed_override;
  SimSpec spec = sim_spec_from_json(doc);

  rexcam::BenchConfig bench;
  bench.net = spec.net;
  bench.sim = spec.sim;
  bench.n_queries = doc.value("n_queries", 100);
  bench.schemes = doc.value("schemes", std::vector<std::string>{"S5-T2"});
  bench.tracking.match_thresh = doc.value("match_thresh", 0.5);
  bench.tracking.exit_t = static_cast<rexcam::FrameIndex>(
      std::llround(doc.value("exit_t_s", 90.0) * spec.net.frame_rate));
  bench.tracking.alpha = doc.value("alpha", 1.0);

  const auto rows = rexcam::run_benchmark(bench);
  fs::create_directories(out_dir);
  std::vector<std::string> outputs;
  if (format == "csv" || format == "both") {
    rexcam::write_file_atomic((fs::path(out_dir) / "bench.csv").string(),
                              rexcam::bench_to_csv(rows));
    outputs.push_back("bench.csv");
  }
  if (format == "json" || format == "both") {
    rexcam::write_file_atomic((fs::path(out_dir) / "bench.json").string(),
                              rexcam::bench_to_json(rows) + "\n");
    outputs.push_back("bench.json");
  }
  std::cout << rexcam::bench_to_csv(rows);

  rexcam::RunManifest manifest;
  manifest.command = "bench";
  manifest.seed = spec.sim.seed;
  manifest.config_hash = rexcam::config_hash(doc.dump());
  manifest.inputs = {config_path};
  manifest.outputs = outputs;
  write_manifest(out_dir, manifest, timer);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-camera identity tracking with spatio-temporal pruning"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string format = "csv";
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  std::string sim_config;
  simulate->add_option("--config", sim_config, "Simulation config JSON")->required();

  auto* profile = app.add_subcommand("profile", "Build a model from labeled tuples");
  std::string truth_path;
  std::string out_model = "model.json";
  std::string sample;
  int s_pct = 5;
  int t_pct = 2;
  double frame_rate = 10.0;
  profile->add_option("--truth", truth_path, "truth.jsonl path")->required();
  profile->add_option("--s", s_pct, "Spatial threshold, integer percent");
  profile->add_option("--t", t_pct, "Temporal threshold, integer percent");
  profile->add_option("--sample", sample, "Frame subsample, e.g. 4/8");
  profile->add_option("--frame-rate", frame_rate, "Frames per second");
  profile->add_option("--out-model", out_model, "Model output path");

  auto* track = app.add_subcommand("track", "Run tracking queries");
  std::string detections_path, network_path, model_path, track_truth;
  std::string scheme = "S5-T2";
  std::string replay = "realtime";
  std::size_t n_queries = 100;
  double match_thresh = 0.0;  // 0 = calibrate
  double exit_t_s = 90.0;
  track->add_option("--detections", detections_path)->required();
  track->add_option("--network", network_path)->required();
  track->add_option("--model", model_path)->required();
  track->add_option("--truth", track_truth, "truth.jsonl for scoring");
  track->add_option("--scheme", scheme,
                    "rexcam scheme S{s}[-T{t}], baseline-all, or baseline-geo");
  track->add_option("--n-queries", n_queries);
  track->add_option("--match-thresh", match_thresh, "0 calibrates from data");
  track->add_option("--exit-t-s", exit_t_s, "Exit threshold, seconds");
  track->add_option("--replay", replay, "realtime, skipN, or ffN");
  double alpha = 1.0;
  track->add_option("--alpha", alpha, "EMA weight for the query representation");

  auto* detect = app.add_subcommand("detect", "Multi-camera identity detection");
  std::string det_detections, det_network, det_model, det_truth;
  rexcam::EntityId query_entity = 0;
  double theta = 0.0;
  double det_match_thresh = 0.5;
  double window_s = 10.0;
  detect->add_option("--detections", det_detections)->required();
  detect->add_option("--network", det_network)->required();
  detect->add_option("--model", det_model)->required();
  detect->add_option("--truth", det_truth, "truth.jsonl for entry priors")->required();
  detect->add_option("--query-entity", query_entity)->required();
  detect->add_option("--theta", theta, "Belief score threshold");
  detect->add_option("--match-thresh", det_match_thresh);
  detect->add_option("--window-s", window_s, "Window length, seconds");

  auto* bench = app.add_subcommand("bench", "Scheme grid benchmark");
  std::string bench_config;
  bench->add_option("--config", bench_config, "Benchmark config JSON")->required();

  // let the global flags (--seed/--out/--format) appear after the subcommand
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim_config, out_dir, seed);
    if (profile->parsed()) {
      return cmd_profile(truth_path, s_pct, t_pct, sample, frame_rate, out_model);
    }
    if (track->parsed()) {
      return cmd_track(detections_path, network_path, model_path, track_truth,
                       scheme, n_queries, match_thresh, exit_t_s, replay, alpha,
                       out_dir);
    }
    if (detect->parsed()) {
      return cmd_detect(det_detections, det_network, det_model, det_truth,
                        query_entity, theta, det_match_thresh, window_s, out_dir);
    }
    if (bench->parsed()) return cmd_bench(bench_config, out_dir, format, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
