#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "radarpose/pointcloud.hpp"
#include "radarpose/scene.hpp"

namespace radarpose {

/// JSON Lines, one record per (frame, radar):
///   {"frame_id", "t_ms", "radar_id", "points": [[x,y,z,v,snr], ...],
///    "gt": [[x,y,z] x 32], "action", "subject", "swing_state"}
/// Fused records add "fused": true and "radars": [ids...].
std::string record_to_json(const DatasetRecord& rec);
DatasetRecord record_from_json(const std::string& line);

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

DatasetRecord to_record(const FusedFrame& frame, const std::vector<int>& radars);
FusedFrame to_fused_frame(const DatasetRecord& rec);

/// Groups raw per-radar records into timestamp-aligned, world-frame,
/// denoised frames. `radar_ids` picks which radars to use (one or two);
/// `poses[id]` is the mounting of radar `id`. Two streams are paired with
/// align_streams; the fused timestamp is the midpoint of the pair.
std::vector<FusedFrame> fuse_records(const std::vector<DatasetRecord>& records, const std::vector<int>& radar_ids,
                                     const std::vector<RadarPose>& poses, const FusionConfig& cfg);

void write_snr_scaler(const std::filesystem::path& path, const SnrScaler& s);
SnrScaler read_snr_scaler(const std::filesystem::path& path);

}  // namespace radarpose
