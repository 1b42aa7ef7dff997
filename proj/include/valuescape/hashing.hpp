#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace valuescape {

// SHA-256 hex digest of a byte string / file. Used for content-addressed
// stage caching and for binding serialized models to their DocTermMatrix.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace valuescape
