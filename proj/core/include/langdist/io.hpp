#pragma once

#include <string>
#include <string_view>

namespace langdist {

std::string read_file(const std::string& path);

// Writes via a sibling temp file and rename(2), so readers never observe a
// partially written artifact. The temp file is removed on failure.
void write_file_atomic(const std::string& path, std::string_view content);

// Hex SHA-256, used for input digests embedded in result artifacts.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::string& path);

}  // namespace langdist
