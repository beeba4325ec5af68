#pragma once

#include <span>
#include <string>
#include <vector>

#include "rexcam/profiler.hpp"
#include "rexcam/simulator.hpp"
#include "rexcam/tracking.hpp"
#include "rexcam/types.hpp"

namespace rexcam {

struct CostModel {
  double c_det = 1.0;
  double c_feat = 1.0;
  double c_reid = 1.0;
  double d_bar = 1.0;  // mean detections per camera frame
};

struct EvalReport {
  std::int64_t compute_cost = 0;  // camera-frames processed
  std::int64_t detections_scored = 0;
  double recall = 0.0;
  double precision = 0.0;
  bool zero_retrieved = false;  // precision reported as 1 with this flag set
  double mean_delay_s = 0.0;
  double savings_factor = 1.0;
};

// Recall counts one instance per ground-truth camera visit after the query
// frame; a match is true iff its detection carries the query's entity.
EvalReport score_results(std::span<const TrackResult> results,
                         std::span<const QuerySpec> queries,
                         std::span<const LabeledDetection> truth,
                         double frame_rate, FrameIndex visit_gap_thresh);

// Analytic savings ratio |V| / |V_corr|; per-camera cost terms cancel when
// uniform. n_corr = 0 maps to +infinity.
double cost_ratio(const CostModel& cost_model, int n_cameras, int n_corr);

// A ranking is the positive/negative annotation of a ranked gallery, best
// match first. Rankings with no positive entry are excluded from both metrics.
using AnnotatedRanking = std::vector<bool>;

double rank_k_accuracy(std::span<const AnnotatedRanking> rankings, int k);
double mean_average_precision(std::span<const AnnotatedRanking> rankings);

// Distance cutoff maximizing F1 over sampled co-identical / non-co-identical
// detection pairs from a labeled partition.
double calibrate_match_thresh(const DetectionStreams& streams, std::uint64_t seed,
                              std::size_t max_pairs = 20000);

// Builds one tracking query per entity (ascending id), anchored at the
// entity's first surviving detection.
std::vector<QuerySpec> make_queries(const DetectionStreams& streams, std::size_t n);

struct SchemeSpec {
  std::string name;  // "baseline-all", "baseline-geo", "S5", "S5-T2", ...
  SchemeMode mode = SchemeMode::kRexcam;
  double s_thresh = 0.0;
  double t_thresh = 0.0;
  bool temporal_enabled = true;
};

SchemeSpec parse_scheme(const std::string& name);

struct BenchConfig {
  NetworkConfig net;
  SimulationConfig sim;           // evaluation partition
  std::uint64_t profile_seed_offset = 1;  // profiling partition = sim.seed + offset
  std::size_t n_queries = 100;
  std::vector<std::string> schemes;
  TrackingConfig tracking;        // mode/thresholds overridden per scheme
  FrameIndex gap_thresh = 0;      // 0 = default (2 s of frames)
};

struct BenchRow {
  std::string scheme;
  double s_thresh = 0.0;
  double t_thresh = 0.0;
  EvalReport report;
};

std::vector<BenchRow> run_benchmark(const BenchConfig& config);

std::string bench_to_csv(std::span<const BenchRow> rows);
std::string bench_to_json(std::span<const BenchRow> rows);

}  // namespace rexcam
