#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "encoder/encoder.hpp"

namespace mgh::enc {

// Binary checkpoint container, all integers and floats little-endian:
//
//   magic         8 bytes  "MGHCKPT\0"
//   version       u32      kCheckpointVersion
//   config_len    u32      byte length of the config JSON that follows
//   config        bytes    EncoderConfig as compact JSON (UTF-8)
//   tensor_count  u32
//   tensors       tensor_count records:
//                   name_len u32, name bytes, rank u32, dims u64[rank],
//                   data f64[product(dims)]
//
// Nothing may follow the last tensor. Tensor order and shapes must match
// parameter_layout(config).
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Encoder& model);
Encoder deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Encoder& model, const std::filesystem::path& path);
Encoder load_checkpoint(const std::filesystem::path& path);

}  // namespace mgh::enc
