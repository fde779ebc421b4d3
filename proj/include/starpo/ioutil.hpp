#pragma once

#include <string>

namespace starpo {

// Formats a double with 17 significant digits; round-trips any finite value.
std::string format_double(double value);

// Writes content to path via a temp file + rename so readers never observe
// a partially written file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace starpo
