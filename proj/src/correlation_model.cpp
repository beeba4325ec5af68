#include "rexcam/correlation_model.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace rexcam {

std::int64_t SpatialMatrix::total_departures(CameraId src) const {
  std::int64_t total = 0;
  for (const auto& [pair, count] : counts) {
    if (pair.first == src) total += count;
  }
  if (auto it = exit_counts.find(src); it != exit_counts.end()) total += it->second;
  return total;
}

std::int64_t TravelTimeHistogram::total() const {
  std::int64_t t = 0;
  for (std::int64_t b : bins) t += b;
  return t;
}

void TravelTimeHistogram::add(FrameIndex delta) {
  const auto bin = static_cast<std::size_t>(delta / bin_width);
  if (bin >= bins.size()) bins.resize(bin + 1, 0);
  ++bins[bin];
  if (total() == 1 || delta < delta_min) delta_min = delta;
}

std::int64_t TravelTimeHistogram::count_in_window(double lo, double hi) const {
  std::int64_t n = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double mid = (static_cast<double>(b) + 0.5) * static_cast<double>(bin_width);
    if (mid >= lo && mid <= hi) n += bins[b];
  }
  return n;
}

double spatial_degree(const SpatioTemporalModel& model, CameraId c_s, CameraId c_d) {
  const std::int64_t total = model.spatial.total_departures(c_s);
  if (total == 0) return 0.0;
  auto it = model.spatial.counts.find({c_s, c_d});
  if (it == model.spatial.counts.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

double temporal_degree(const SpatioTemporalModel& model, CameraId c_s, CameraId c_d,
                       double delta_lo, double delta_hi) {
  if (delta_lo > delta_hi) {
    throw std::invalid_argument("temporal_degree: window bounds out of order");
  }
  auto it = model.temporal.find({c_s, c_d});
  if (it == model.temporal.end() || it->second.total() == 0) return 0.0;
  const TravelTimeHistogram& hist = it->second;
  return static_cast<double>(hist.count_in_window(delta_lo, delta_hi)) /
         static_cast<double>(hist.total());
}

bool model_eval(const SpatioTemporalModel& model, CameraId c_s, CameraId c_d,
                FrameIndex f_q, FrameIndex f_curr) {
  if (spatial_degree(model, c_s, c_d) < model.s_thresh) return false;
  if (!model.temporal_enabled) return true;
  auto it = model.temporal.find({c_s, c_d});
  if (it == model.temporal.end() || it->second.total() == 0) return false;
  const FrameIndex delta = f_curr - f_q;
  if (delta < it->second.delta_min) return false;
  const double arrived = temporal_degree(model, c_s, c_d,
                                         static_cast<double>(it->second.delta_min),
                                         static_cast<double>(delta));
  return arrived <= 1.0 - model.t_thresh;
}

std::set<CameraId> filter_cameras(const SpatioTemporalModel& model, CameraId c_q,
                                  FrameIndex f_q, FrameIndex f_curr,
                                  const std::set<CameraId>& cameras) {
  std::set<CameraId> out;
  for (CameraId c : cameras) {
    if (model_eval(model, c_q, c, f_q, f_curr)) out.insert(c);
  }
  return out;
}

SpatioTemporalModel relax(const SpatioTemporalModel& model, double factor) {
  if (!(factor > 1.0)) {
    throw std::invalid_argument("relax: factor must be > 1");
  }
  SpatioTemporalModel relaxed = model;
  relaxed.s_thresh /= factor;
  relaxed.t_thresh /= factor;
  return relaxed;
}

namespace {

using nlohmann::json;

json require_field(const json& obj, const char* name) {
  if (!obj.contains(name)) {
    throw std::runtime_error(std::string("model parse error: missing field \"") +
                             name + "\"");
  }
  return obj.at(name);
}

}  // namespace

std::string model_to_json(const SpatioTemporalModel& model) {
  json pairs = json::array();
  for (const auto& [pair, hist] : model.temporal) {
    json rec;
    rec["src"] = pair.first;
    rec["dst"] = pair.second;
    auto it = model.spatial.counts.find(pair);
    rec["count"] = it == model.spatial.counts.end() ? 0 : it->second;
    rec["delta_min"] = hist.delta_min;
    rec["bins"] = hist.bins;
    pairs.push_back(std::move(rec));
  }
  for (const auto& [src, count] : model.spatial.exit_counts) {
    json rec;
    rec["src"] = src;
    rec["dst"] = kExitCamera;
    rec["count"] = count;
    rec["delta_min"] = 0;
    rec["bins"] = json::array();
    pairs.push_back(std::move(rec));
  }
  json doc;
  doc["n_cameras"] = model.n_cameras;
  doc["s_thresh"] = model.s_thresh;
  doc["t_thresh"] = model.t_thresh;
  doc["bin_width"] = model.bin_width;
  doc["temporal_enabled"] = model.temporal_enabled;
  doc["pairs"] = std::move(pairs);
  return doc.dump(2);
}

SpatioTemporalModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("model parse error: ") + e.what());
  }
  SpatioTemporalModel model;
  model.n_cameras = require_field(doc, "n_cameras").get<int>();
  model.s_thresh = require_field(doc, "s_thresh").get<double>();
  model.t_thresh = require_field(doc, "t_thresh").get<double>();
  model.bin_width = require_field(doc, "bin_width").get<FrameIndex>();
  model.temporal_enabled = doc.value("temporal_enabled", true);
  for (const json& rec : require_field(doc, "pairs")) {
    const auto src = require_field(rec, "src").get<CameraId>();
    const auto dst = require_field(rec, "dst").get<CameraId>();
    const auto count = require_field(rec, "count").get<std::int64_t>();
    if (dst == kExitCamera) {
      model.spatial.exit_counts[src] = count;
      continue;
    }
    model.spatial.counts[{src, dst}] = count;
    TravelTimeHistogram hist;
    hist.bin_width = model.bin_width;
    hist.delta_min = require_field(rec, "delta_min").get<FrameIndex>();
    hist.bins = require_field(rec, "bins").get<std::vector<std::int64_t>>();
    model.temporal[{src, dst}] = std::move(hist);
  }
  return model;
}

void save_model(const SpatioTemporalModel& model, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_model: cannot open " + tmp);
    out << model_to_json(model) << '\n';
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("save_model: rename failed for " + path);
  }
}

SpatioTemporalModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

bool models_equal(const SpatioTemporalModel& a, const SpatioTemporalModel& b) {
  if (a.n_cameras != b.n_cameras || a.s_thresh != b.s_thresh ||
      a.t_thresh != b.t_thresh || a.bin_width != b.bin_width ||
      a.temporal_enabled != b.temporal_enabled ||
      a.spatial.counts != b.spatial.counts ||
      a.spatial.exit_counts != b.spatial.exit_counts ||
      a.temporal.size() != b.temporal.size()) {
    return false;
  }
  for (const auto& [pair, hist] : a.temporal) {
    auto it = b.temporal.find(pair);
    if (it == b.temporal.end() || it->second.bins != hist.bins ||
        it->second.bin_width != hist.bin_width ||
        it->second.delta_min != hist.delta_min) {
      return false;
    }
  }
  return true;
}

}  // namespace rexcam
