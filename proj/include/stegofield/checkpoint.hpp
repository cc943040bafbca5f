#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stegofield/field.hpp"

namespace stegofield {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 64;

/// Little-endian layout:
///   0  "SNGP"            4  u32 version
///   8  u32 L            12  u32 log2 T       16  u32 F
///  20  u32 N_min        24  u32 N_max        28  u32 hidden width
///  32  u32 hidden layers
///  36  u8 d  37 u8 mode  38 u8 white background  39 u8 zero
///  40  f32 box scale[3], f32 box offset[3]
///  64  tables, level-major, f32
///      then per MLP layer: row-major (out x in) f32 weights, then f32 biases
/// Keys are never part of a checkpoint.
std::size_t checkpoint_size(const HashGridConfig& grid, FieldMode mode, int hidden_width, int hidden_layers);

std::vector<std::uint8_t> serialize_checkpoint(const StegoField& field);
StegoField deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const StegoField& field, const std::filesystem::path& path);
StegoField load_checkpoint(const std::filesystem::path& path);

}  // namespace stegofield
