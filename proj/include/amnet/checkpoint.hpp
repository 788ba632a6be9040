#pragma once

// Binary parameter file, little-endian:
//   "AMNT" | u32 version (1) | u32 count |
//   count x { u16 name_len | name | u8 ndim | ndim x u32 dim | f32 values }
// Parameters are written in name order.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "amnet/network.hpp"
#include "amnet/params.hpp"

namespace amnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const ParamStore<float>& params);
/// Throws CheckpointError with the byte offset (and parameter name, once known).
ParamStore<float> parse_checkpoint(std::span<const std::uint8_t> bytes);

/// Throws CheckpointError when the file cannot be written.
void save_checkpoint(const ParamStore<float>& params, const std::filesystem::path& path);
ParamStore<float> load_checkpoint(const std::filesystem::path& path);
/// Also validates the layout against `cfg`; mismatches raise CheckpointError.
ParamStore<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg);

}  // namespace amnet
