#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace msar {

/// Write `content` to a sibling temp file then rename it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double value);

}  // namespace msar
