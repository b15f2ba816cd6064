#pragma once

#include <filesystem>
#include <string>

namespace structeval::io {

// Both throw MissingFileError / IoError (exit class 2).
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace structeval::io
