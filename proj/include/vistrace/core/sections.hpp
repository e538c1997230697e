// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace vistrace {

/// Parses prompt asset files made of `[name]` header lines followed by free
/// text. Leading/trailing blank lines of each section are dropped; lines
/// starting with `#` before the first header are comments.
[[nodiscard]] std::map<std::string, std::string> parse_sections(std::string_view text);

/// Throws IoError when the file cannot be read.
[[nodiscard]] std::map<std::string, std::string> load_sections(const std::filesystem::path& path);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

} // namespace vistrace
