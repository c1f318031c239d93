#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mgh {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Stable 64-bit mixing used to fan a top-level seed out to sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mgh
