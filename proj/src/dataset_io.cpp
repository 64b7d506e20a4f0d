#include "radarpose/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace radarpose {

using json = nlohmann::ordered_json;

std::string record_to_json(const DatasetRecord& rec) {
  json j;
  j["frame_id"] = rec.frame_id;
  j["t_ms"] = rec.t_ms;
  j["radar_id"] = rec.radar_id;
  json pts = json::array();
  for (const auto& p : rec.points) pts.push_back({p.xyz.x(), p.xyz.y(), p.xyz.z(), p.velocity, p.snr});
  j["points"] = std::move(pts);
  json gt = json::array();
  for (const auto& q : rec.gt.joints) gt.push_back({q.x(), q.y(), q.z()});
  j["gt"] = std::move(gt);
  j["action"] = std::string(action_name(rec.gt.action));
  j["subject"] = rec.gt.subject_id;
  j["swing_state"] = std::string(swing_state_name(rec.gt.swing_state));
  if (rec.fused) {
    j["fused"] = true;
    j["radars"] = rec.radars;
  }
  return j.dump();
}

DatasetRecord record_from_json(const std::string& line) {
  const json j = json::parse(line);
  DatasetRecord rec;
  rec.frame_id = j.at("frame_id").get<std::int64_t>();
  rec.t_ms = j.at("t_ms").get<std::int64_t>();
  rec.radar_id = j.at("radar_id").get<int>();
  for (const auto& p : j.at("points")) {
    if (p.size() != 5) throw std::runtime_error("dataset: point must have 5 values");
    RadarPoint rp;
    rp.xyz = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    rp.velocity = p[3].get<double>();
    rp.snr = p[4].get<double>();
    rec.points.push_back(rp);
  }
  const auto& gt = j.at("gt");
  if (gt.size() != kJointCount) throw std::runtime_error("dataset: gt must have 32 joints");
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (gt[i].size() != 3) throw std::runtime_error("dataset: gt joint must have 3 values");
    rec.gt.joints[i] = Vec3(gt[i][0].get<double>(), gt[i][1].get<double>(), gt[i][2].get<double>());
  }
  rec.gt.action = action_from_name(j.at("action").get<std::string>());
  rec.gt.subject_id = j.at("subject").get<int>();
  rec.gt.swing_state = swing_state_from_name(j.at("swing_state").get<std::string>());
  rec.gt.t_ms = rec.t_ms;
  if (auto it = j.find("fused"); it != j.end()) rec.fused = it->get<bool>();
  if (auto it = j.find("radars"); it != j.end()) rec.radars = it->get<std::vector<int>>();
  return rec;
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& r : records) out << record_to_json(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<DatasetRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

DatasetRecord to_record(const FusedFrame& frame, const std::vector<int>& radars) {
  DatasetRecord rec;
  rec.frame_id = frame.frame_id;
  rec.t_ms = frame.t_ms;
  rec.radar_id = radars.empty() ? 0 : radars.front();
  rec.points = frame.points;
  rec.gt = frame.gt;
  rec.fused = true;
  rec.radars = radars;
  return rec;
}

FusedFrame to_fused_frame(const DatasetRecord& rec) {
  FusedFrame f;
  f.frame_id = rec.frame_id;
  f.t_ms = rec.t_ms;
  f.points = rec.points;
  f.gt = rec.gt;
  return f;
}

std::vector<FusedFrame> fuse_records(const std::vector<DatasetRecord>& records, const std::vector<int>& radar_ids,
                                     const std::vector<RadarPose>& poses, const FusionConfig& cfg) {
  if (radar_ids.empty() || radar_ids.size() > 2) throw std::invalid_argument("fuse_records: use one or two radars");
  for (int id : radar_ids)
    if (id < 0 || static_cast<std::size_t>(id) >= poses.size())
      throw std::invalid_argument("fuse_records: no pose for radar " + std::to_string(id));

  std::vector<std::vector<const DatasetRecord*>> streams(radar_ids.size());
  for (const auto& r : records) {
    if (r.fused) throw std::invalid_argument("fuse_records: input is already fused");
    for (std::size_t s = 0; s < radar_ids.size(); ++s)
      if (r.radar_id == radar_ids[s]) streams[s].push_back(&r);
  }
  for (auto& s : streams)
    std::stable_sort(s.begin(), s.end(), [](auto* l, auto* r) { return l->t_ms < r->t_ms; });

  std::vector<FusedFrame> out;
  auto make = [&](std::vector<const DatasetRecord*> parts) {
    std::vector<std::vector<RadarPoint>> pts;
    std::vector<RadarPose> ps;
    std::int64_t t_sum = 0;
    for (std::size_t s = 0; s < parts.size(); ++s) {
      pts.push_back(parts[s]->points);
      ps.push_back(poses[static_cast<std::size_t>(radar_ids[s])]);
      t_sum += parts[s]->t_ms;
    }
    FusedFrame f;
    f.frame_id = parts.front()->frame_id;
    f.t_ms = t_sum / static_cast<std::int64_t>(parts.size());
    f.points = fuse_points(pts, ps, cfg);
    f.gt = parts.front()->gt;
    out.push_back(std::move(f));
  };

  if (streams.size() == 1) {
    for (auto* r : streams[0]) make({r});
    return out;
  }
  std::vector<std::int64_t> ta, tb;
  for (auto* r : streams[0]) ta.push_back(r->t_ms);
  for (auto* r : streams[1]) tb.push_back(r->t_ms);
  for (const auto& pair : align_streams(ta, tb, cfg.window_ms)) make({streams[0][pair.a], streams[1][pair.b]});
  return out;
}

void write_snr_scaler(const std::filesystem::path& path, const SnrScaler& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << json{{"snr_min", s.snr_min}, {"snr_max", s.snr_max}}.dump() << '\n';
}

SnrScaler read_snr_scaler(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  const json j = json::parse(in);
  return {j.at("snr_min").get<double>(), j.at("snr_max").get<double>()};
}

}  // namespace radarpose
