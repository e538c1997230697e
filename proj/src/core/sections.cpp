// SPDX-License-Identifier: Apache-2.0
#include "vistrace/core/sections.hpp"

#include "vistrace/core/error.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/core.h>

namespace vistrace {

namespace {

std::string trim_blank_lines(const std::string& s) {
    auto begin = s.find_first_not_of("\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of("\r\n \t");
    // Keep leading indentation of the first line.
    begin = s.rfind('\n', begin) == std::string::npos ? 0 : s.rfind('\n', begin) + 1;
    return s.substr(begin, end - begin + 1);
}

} // namespace

std::map<std::string, std::string> parse_sections(std::string_view text) {
    std::map<std::string, std::string> out;
    std::string current;
    bool in_section = false;
    std::string body;

    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.size() >= 3 && line.front() == '[' && line.back() == ']' &&
            line.find_first_of(" \t") == std::string::npos) {
            if (in_section) out[current] = trim_blank_lines(body);
            current = line.substr(1, line.size() - 2);
            body.clear();
            in_section = true;
            continue;
        }
        if (!in_section) continue; // preamble comments
        body += line;
        body += '\n';
    }
    if (in_section) out[current] = trim_blank_lines(body);
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> load_sections(const std::filesystem::path& path) {
    return parse_sections(read_text_file(path));
}

} // namespace vistrace
