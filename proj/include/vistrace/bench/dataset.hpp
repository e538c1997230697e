// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmark datasets are tab-separated files with a header row. Columns:
//
//     multiple choice   index, question, A, B, C, D, answer, category, image
//     yes/no pairs      index, question, answer (yes|no), category, image
//     judged            index, question, answer, category, image
//
// `image` is base64 PNG or JPEG. Blank option cells mean the option is
// absent. Judged categories are comma-separated capability tags
// (rec, ocr, know, gen, spat, math). Fields may not contain tabs or newlines.

#include "vistrace/core/error.hpp"
#include "vistrace/core/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vistrace::bench {

enum class BenchmarkKind { MultipleChoice, YesNoPaired, OpenEndedJudged };

inline constexpr std::array<BenchmarkKind, 3> kAllKinds{BenchmarkKind::MultipleChoice, BenchmarkKind::YesNoPaired,
                                                        BenchmarkKind::OpenEndedJudged};

/// "multiple_choice", "yes_no_paired", "open_ended_judged".
[[nodiscard]] std::string_view to_string(BenchmarkKind kind) noexcept;

/// Accepts the canonical names with '-' or '_', plus "mc", "mmbench",
/// "yes-no", "mme", "judged", "mmvet". Throws InvalidArgument.
[[nodiscard]] BenchmarkKind parse_benchmark_kind(std::string_view text);

/// `line` is the 1-based line number in the file (the header is line 1).
class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

[[nodiscard]] std::vector<Task> load_multiple_choice(const std::filesystem::path& path);
[[nodiscard]] std::vector<Task> load_yes_no(const std::filesystem::path& path);
[[nodiscard]] std::vector<Task> load_open_ended(const std::filesystem::path& path);
[[nodiscard]] std::vector<Task> load_dataset(const std::filesystem::path& path, BenchmarkKind kind);

/// Inverse of the loaders, for building fixture sets.
[[nodiscard]] std::string render_dataset(const std::vector<Task>& tasks, BenchmarkKind kind);

/// Capability tag to category name, e.g. "spat" -> "Spatial Awareness".
/// Full names pass through unchanged. Throws InvalidArgument.
[[nodiscard]] std::string capability_name(std::string_view tag);

/// The six judged capability categories in report order.
[[nodiscard]] const std::vector<std::string>& capability_order();

} // namespace vistrace::bench
