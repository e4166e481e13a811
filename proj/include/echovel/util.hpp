#pragma once

#include <string>

namespace echovel {

std::string read_text_file(const std::string& path);

// Writes to a sibling temp file and renames into place so readers never see
// a partial file.
void write_text_file_atomic(const std::string& path, const std::string& content);

// Shortest round-trip decimal representation, '.' separator, locale-free.
std::string format_double(double v);

}  // namespace echovel
