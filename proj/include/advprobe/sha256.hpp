#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace advprobe {

// Hex-encoded SHA-256. Used for config hashes, cache keys and manifest
// checksums; no external crypto dependency.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

} // namespace advprobe
