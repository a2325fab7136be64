#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace slvideo {

// Throws Error(Io) on failure.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace slvideo
