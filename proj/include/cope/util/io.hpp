#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cope {

std::string read_file(const std::filesystem::path& path);

/// Writes via a uniquely named sibling temp file and rename(2), so readers
/// never observe a partial file and concurrent writers of the same path end
/// with one complete copy (last writer wins).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Appends `line` plus '\n' with a single write(2) on an O_APPEND descriptor.
void append_line(const std::filesystem::path& path, std::string_view line);

/// Splits on '\n'; a trailing '\r' is stripped from each line.
std::vector<std::string> split_lines(std::string_view text);

/// Current UTC time as ISO-8601 with second precision.
std::string utc_timestamp();

}  // namespace cope
