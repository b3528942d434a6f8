#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tcsim::io {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial artifact behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

}  // namespace tcsim::io
