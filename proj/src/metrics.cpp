#include "rexcam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rexcam/reid.hpp"

namespace rexcam {

EvalReport score_results(std::span<const TrackResult> results,
                         std::span<const QuerySpec> queries,
                         std::span<const LabeledDetection> truth,
                         double frame_rate, FrameIndex visit_gap_thresh) {
  if (results.size() != queries.size()) {
    throw std::invalid_argument("score_results: results/queries size mismatch");
  }
  const std::vector<CameraVisit> visits =
      segment_visits(truth, visit_gap_thresh);
  std::map<EntityId, std::vector<const CameraVisit*>> visits_by_entity;
  for (const CameraVisit& v : visits) visits_by_entity[v.entity].push_back(&v);

  std::int64_t true_instances = 0;
  std::int64_t retrieved_visits = 0;
  std::int64_t retrieved_true = 0;
  std::int64_t retrieved_all = 0;
  double delay_s_sum = 0.0;

  EvalReport report;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const TrackResult& res = results[i];
    const QuerySpec& query = queries[i];
    if (!query.truth_entity) {
      throw std::invalid_argument("score_results: query lacks truth_entity");
    }
    report.compute_cost += res.frames_processed;
    report.detections_scored += res.detections_scored;
    delay_s_sum += static_cast<double>(res.delay_frames) / frame_rate;

    retrieved_all += static_cast<std::int64_t>(res.matches.size());
    for (const MatchRecord& m : res.matches) {
      if (m.detection.truth_entity == query.truth_entity) ++retrieved_true;
    }

    auto it = visits_by_entity.find(*query.truth_entity);
    if (it == visits_by_entity.end()) continue;
    for (const CameraVisit* visit : it->second) {
      if (visit->last_frame <= query.query_frame) continue;
      ++true_instances;
      bool retrieved = false;
      for (const MatchRecord& m : res.matches) {
        if (m.detection.truth_entity == query.truth_entity &&
            m.detection.camera == visit->camera &&
            m.detection.frame >= visit->first_frame &&
            m.detection.frame <= visit->last_frame) {
          retrieved = true;
          break;
        }
      }
      if (retrieved) ++retrieved_visits;
    }
  }

  report.recall = true_instances > 0
                      ? static_cast<double>(retrieved_visits) /
                            static_cast<double>(true_instances)
                      : 0.0;
  if (retrieved_all == 0) {
    report.precision = 1.0;
    report.zero_retrieved = true;
  } else {
    report.precision =
        static_cast<double>(retrieved_true) / static_cast<double>(retrieved_all);
  }
  report.mean_delay_s =
      results.empty() ? 0.0 : delay_s_sum / static_cast<double>(results.size());
  return report;
}

double cost_ratio(const CostModel& cost_model, int n_cameras, int n_corr) {
  const double per_camera =
      cost_model.c_det + cost_model.d_bar * (cost_model.c_feat + cost_model.c_reid);
  if (n_corr == 0) return std::numeric_limits<double>::infinity();
  return (per_camera * n_cameras) / (per_camera * n_corr);
}

double rank_k_accuracy(std::span<const AnnotatedRanking> rankings, int k) {
  if (rankings.empty()) {
    throw std::invalid_argument("rank_k_accuracy: no rankings");
  }
  std::size_t usable = 0;
  std::size_t hits = 0;
  for (const AnnotatedRanking& ranking : rankings) {
    if (std::find(ranking.begin(), ranking.end(), true) == ranking.end()) continue;
    ++usable;
    const std::size_t top = std::min<std::size_t>(ranking.size(),
                                                  static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < top; ++i) {
      if (ranking[i]) {
        ++hits;
        break;
      }
    }
  }
  if (usable == 0) throw std::invalid_argument("rank_k_accuracy: no positives");
  return static_cast<double>(hits) / static_cast<double>(usable);
}

double mean_average_precision(std::span<const AnnotatedRanking> rankings) {
  if (rankings.empty()) {
    throw std::invalid_argument("mean_average_precision: no rankings");
  }
  double ap_sum = 0.0;
  std::size_t usable = 0;
  for (const AnnotatedRanking& ranking : rankings) {
    std::size_t positives = 0;
    for (bool b : ranking) positives += b ? 1 : 0;
    if (positives == 0) continue;
    ++usable;
    double ap = 0.0;
    std::size_t seen_pos = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      if (!ranking[i]) continue;
      ++seen_pos;
      const double precision_at =
          static_cast<double>(seen_pos) / static_cast<double>(i + 1);
      ap += precision_at / static_cast<double>(positives);
    }
    ap_sum += ap;
  }
  if (usable == 0) {
    throw std::invalid_argument("mean_average_precision: no positives");
  }
  return ap_sum / static_cast<double>(usable);
}

double calibrate_match_thresh(const DetectionStreams& streams, std::uint64_t seed,
                              std::size_t max_pairs) {
  std::vector<const DetectionEvent*> labeled;
  for (const auto& [cam, stream] : streams.by_camera) {
    for (const DetectionEvent& det : stream) {
      if (det.truth_entity) labeled.push_back(&det);
    }
  }
  if (labeled.size() < 2) {
    throw std::runtime_error("calibrate_match_thresh: not enough labeled detections");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);

  struct Sample {
    double distance;
    bool co_identical;
  };
  std::vector<Sample> samples;
  samples.reserve(max_pairs);
  for (std::size_t i = 0; i < max_pairs; ++i) {
    const DetectionEvent* a = labeled[pick(rng)];
    const DetectionEvent* b = labeled[pick(rng)];
    if (a == b) continue;
    samples.push_back({feature_distance(a->feature, b->feature),
                       a->truth_entity == b->truth_entity});
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& x, const Sample& y) { return x.distance < y.distance; });

  std::size_t total_pos = 0;
  for (const Sample& s : samples) total_pos += s.co_identical ? 1 : 0;
  if (total_pos == 0) {
    throw std::runtime_error("calibrate_match_thresh: no co-identical pairs sampled");
  }

  // Sweep cutoffs between consecutive distances; predict positive iff below.
  double best_f1 = -1.0;
  double best_thresh = samples.back().distance + 1.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    tp += samples[i].co_identical ? 1 : 0;
    fp += samples[i].co_identical ? 0 : 1;
    const double next = i + 1 < samples.size() ? samples[i + 1].distance
                                               : samples[i].distance + 1.0;
    const double cutoff = 0.5 * (samples[i].distance + next);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double f1 = precision + recall > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_thresh = cutoff;
    }
  }
  return best_thresh;
}

std::vector<QuerySpec> make_queries(const DetectionStreams& streams, std::size_t n) {
  std::map<EntityId, const DetectionEvent*> first_det;
  for (const auto& [cam, stream] : streams.by_camera) {
    for (const DetectionEvent& det : stream) {
      if (!det.truth_entity) continue;
      auto [it, inserted] = first_det.try_emplace(*det.truth_entity, &det);
      if (!inserted && (det.frame < it->second->frame ||
                        (det.frame == it->second->frame &&
                         det.detection_id < it->second->detection_id))) {
        it->second = &det;
      }
    }
  }
  std::vector<QuerySpec> queries;
  for (const auto& [entity, det] : first_det) {
    if (queries.size() >= n) break;
    QuerySpec q;
    q.query_feature = det->feature;
    q.query_camera = det->camera;
    q.query_frame = det->frame;
    q.truth_entity = entity;
    queries.push_back(std::move(q));
  }
  return queries;
}

SchemeSpec parse_scheme(const std::string& name) {
  SchemeSpec spec;
  spec.name = name;
  if (name == "baseline-all") {
    spec.mode = SchemeMode::kBaselineAll;
    return spec;
  }
  if (name == "baseline-geo") {
    spec.mode = SchemeMode::kBaselineGeo;
    return spec;
  }
  // S{s} or S{s}-T{t}, thresholds as integer percent.
  if (name.size() < 2 || name[0] != 'S') {
    throw std::invalid_argument("unknown scheme: " + name);
  }
  spec.mode = SchemeMode::kRexcam;
  const std::size_t dash = name.find("-T");
  const std::string s_part = name.substr(1, dash == std::string::npos
                                                ? std::string::npos
                                                : dash - 1);
  spec.s_thresh = std::stod(s_part) / 100.0;
  if (dash == std::string::npos) {
    spec.temporal_enabled = false;
  } else {
    spec.t_thresh = std::stod(name.substr(dash + 2)) / 100.0;
  }
  return spec;
}

std::vector<BenchRow> run_benchmark(const BenchConfig& config) {
  const NetworkAndGraph net = generate_network(config.net);
  const FrameIndex gap =
      config.gap_thresh > 0
          ? config.gap_thresh
          : static_cast<FrameIndex>(std::llround(2.0 * config.net.frame_rate));

  // Profiling partition: an independent simulation of the same network.
  SimulationConfig profile_sim = config.sim;
  profile_sim.seed = config.sim.seed + config.profile_seed_offset;
  const std::vector<LabeledDetection> profile_truth =
      generate_truth(net.network, net.graph, profile_sim);
  const auto transitions = extract_transitions(profile_truth, gap);

  // Evaluation partition.
  const std::vector<LabeledDetection> truth =
      generate_truth(net.network, net.graph, config.sim);
  const DetectionStreams streams =
      synthesize_detections(truth, net.network, config.sim);
  const std::vector<QuerySpec> queries = make_queries(streams, config.n_queries);

  const FrameIndex bin_width =
      static_cast<FrameIndex>(std::llround(config.net.frame_rate));

  // The all-camera baseline anchors the savings factor of every scheme.
  std::map<std::string, EvalReport> reports;
  std::int64_t baseline_frames = 0;
  {
    SpatioTemporalModel model =
        build_model(transitions, 0.0, 0.0, bin_width,
                    static_cast<int>(net.network.cameras.size()));
    TrackingConfig tc = config.tracking;
    tc.mode = SchemeMode::kBaselineAll;
    const auto results =
        run_workload(streams, net.network, model, queries, tc, threads_from_env());
    const EvalReport rep =
        score_results(results, queries, truth, config.net.frame_rate, gap);
    baseline_frames = rep.compute_cost;
  }

  std::vector<BenchRow> rows;
  for (const std::string& name : config.schemes) {
    const SchemeSpec spec = parse_scheme(name);
    SpatioTemporalModel model =
        build_model(transitions, spec.s_thresh, spec.t_thresh, bin_width,
                    static_cast<int>(net.network.cameras.size()));
    model.temporal_enabled = spec.temporal_enabled;
    TrackingConfig tc = config.tracking;
    tc.mode = spec.mode;
    const auto results =
        run_workload(streams, net.network, model, queries, tc, threads_from_env());
    EvalReport rep =
        score_results(results, queries, truth, config.net.frame_rate, gap);
    rep.savings_factor =
        rep.compute_cost > 0
            ? static_cast<double>(baseline_frames) / static_cast<double>(rep.compute_cost)
            : std::numeric_limits<double>::infinity();
    rows.push_back({spec.name, spec.s_thresh, spec.t_thresh, rep});
  }
  return rows;
}

std::string bench_to_csv(std::span<const BenchRow> rows) {
  std::ostringstream out;
  out << "scheme,s_thresh,t_thresh,frames_processed,detections_scored,recall,"
         "precision,mean_delay_s,savings_factor\n";
  for (const BenchRow& row : rows) {
    out << row.scheme << ',' << row.s_thresh << ',' << row.t_thresh << ','
        << row.report.compute_cost << ',' << row.report.detections_scored << ','
        << row.report.recall << ',' << row.report.precision << ','
        << row.report.mean_delay_s << ',' << row.report.savings_factor << '\n';
  }
  return out.str();
}

std::string bench_to_json(std::span<const BenchRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const BenchRow& row : rows) {
    nlohmann::json rec;
    rec["scheme"] = row.scheme;
    rec["s_thresh"] = row.s_thresh;
    rec["t_thresh"] = row.t_thresh;
    rec["frames_processed"] = row.report.compute_cost;
    rec["detections_scored"] = row.report.detections_scored;
    rec["recall"] = row.report.recall;
    rec["precision"] = row.report.precision;
    rec["mean_delay_s"] = row.report.mean_delay_s;
    rec["savings_factor"] = row.report.savings_factor;
    arr.push_back(std::move(rec));
  }
  return arr.dump(2);
}

}  // namespace rexcam
