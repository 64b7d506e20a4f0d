#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "radarpose/model.hpp"

namespace radarpose {

inline constexpr std::string_view kCheckpointMagic = "RPOSECKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Byte layout is described in docs/checkpoint_format.md.
std::string encode_checkpoint(const ModelParams& params);
/// Throws std::runtime_error on a bad magic, unknown version, truncation or
/// tensors that do not fit the stored config.
ModelParams decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

/// JSON text for a ModelConfig and back; shared with the CLI reports.
std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(std::string_view text);

}  // namespace radarpose
