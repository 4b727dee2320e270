#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace simtol::io {

// One record per UTF-8 line, 1-based line number = id. CR is stripped, a
// trailing newline is optional. Throws std::runtime_error naming the line
// on undecodable input.
std::vector<std::u32string> read_string_file(const std::string& path);

// One set per line, tokens separated by single spaces. Duplicate tokens are
// collapsed; when `warnings` is non-null a note naming the line is appended
// per collapsed record. Empty lines yield empty records (callers reject).
std::vector<std::vector<std::string>> read_set_file(const std::string& path,
                                                    std::vector<std::string>* warnings = nullptr);

// Fixed 6-decimal rendering for byte-stable diffs.
std::string format_value(double v);

} // namespace simtol::io
