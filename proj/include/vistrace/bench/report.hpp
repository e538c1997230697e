// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/bench/score.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace vistrace::bench {

enum class ReportFormat { Json, Csv, Markdown };

[[nodiscard]] std::string_view to_string(ReportFormat f) noexcept;
/// "json", "csv", "markdown" or "md". Throws InvalidArgument.
[[nodiscard]] ReportFormat parse_report_format(std::string_view text);
[[nodiscard]] std::string_view file_extension(ReportFormat f) noexcept;

/// JSON and CSV keep full precision; markdown rounds to one decimal and
/// shows multiple-choice accuracy as a percentage. CSV has one row per
/// category plus a final `total` row.
[[nodiscard]] std::string emit_report(const ScoreReport& report, ReportFormat format);

/// Action usage alone: overall counts sorted by count, then one block per
/// category. CSV rows are `scope,action,count` with scope `overall` or the
/// category name.
[[nodiscard]] std::string emit_action_counts(const ActionCounts& counts, ReportFormat format);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);

} // namespace vistrace::bench
