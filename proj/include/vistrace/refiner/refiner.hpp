// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/core/types.hpp"
#include "vistrace/gateway/chat.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vistrace::refiner {

struct RefineTemplate {
    /// System message for the refinement request.
    std::string instructions;
    /// System message for zero-shot answering.
    std::string zero_shot_instructions;
    /// Appended after the question block, e.g. "Answer with the option letter."
    std::string answer_directive;
};

/// Reads `[refine]`, `[zero_shot]` and `[answer_directive]` sections.
[[nodiscard]] RefineTemplate load_refine_template(const std::string& path);

/// Text of one series item as it appears in the refinement request.
[[nodiscard]] std::string render_step_text(const MultimodalRationale& item);

/// Stage-2 request. The user message holds, for each item in order, its
/// step text followed by its visual rationale (omitted under TextOnly or when
/// the step has none), then the question block and the original image.
/// When the request would exceed `max_images` images (original included),
/// the oldest rationale images are dropped first. 0 means unlimited.
/// Throws InvalidArgument for ZeroShot.
[[nodiscard]] std::vector<gateway::ChatMessage> build_refine_prompt(const Task& task, const RationaleSeries& series,
                                                                    RationaleMode mode, const RefineTemplate& tmpl,
                                                                    std::size_t max_images = 0);

/// Single request answering from the question and image alone.
[[nodiscard]] std::vector<gateway::ChatMessage> build_zero_shot_prompt(const Task& task, const RefineTemplate& tmpl);

/// Picks the option the answer names, trying in order: an "Answer: X"
/// marker; the first standalone option letter; the option whose text appears
/// verbatim (earliest occurrence wins). Only labels from `options` come back.
[[nodiscard]] std::optional<std::string> extract_choice(std::string_view answer_text,
                                                        const std::vector<Option>& options);

enum class YesNo { Yes, No, Unknown };

[[nodiscard]] std::string_view to_string(YesNo v) noexcept;

/// Lowercases and strips punctuation; a leading "yes"/"no" decides, else a
/// lone "yes" or "no" word anywhere, else Unknown.
[[nodiscard]] YesNo normalize_yesno(std::string_view answer_text);

} // namespace vistrace::refiner
