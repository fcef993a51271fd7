#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace semlead {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws semlead::Error when the
/// file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace semlead
