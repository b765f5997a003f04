#pragma once

#include <filesystem>
#include <string>

namespace disco::detail {

/// Whole-file read; throws Io on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace disco::detail
