// SPDX-License-Identifier: Apache-2.0
#include "vistrace/refiner/refiner.hpp"

#include "vistrace/core/error.hpp"
#include "vistrace/core/sections.hpp"
#include "vistrace/planner/planner.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <sstream>

#include <fmt/core.h>

namespace vistrace::refiner {

using gateway::ChatMessage;
using gateway::ImagePart;
using gateway::Part;
using gateway::TextPart;

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string question_block(const Task& task, const RefineTemplate& tmpl) {
    auto text = planner::format_question(task);
    if (!tmpl.answer_directive.empty()) text += "\n" + tmpl.answer_directive;
    return text;
}

bool has_label(const std::vector<Option>& options, char c) {
    return std::any_of(options.begin(), options.end(),
                       [c](const Option& o) { return o.label.size() == 1 && o.label[0] == c; });
}

std::optional<std::string> answer_marker(std::string_view text, const std::vector<Option>& options) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t pos = 0;
    while ((pos = lower.find("answer", pos)) != std::string::npos) {
        std::size_t i = pos + 6;
        pos = i;
        while (i < text.size() && text[i] == ' ') ++i;
        if (i >= text.size() || text[i] != ':') continue;
        ++i;
        while (i < text.size() && (text[i] == ' ' || text[i] == '(' || text[i] == '*')) ++i;
        if (i >= text.size()) break;
        const char c = text[i];
        const bool standalone = i + 1 >= text.size() || !is_alnum(text[i + 1]);
        if (std::isupper(static_cast<unsigned char>(c)) && standalone && has_label(options, c))
            return std::string(1, c);
    }
    return std::nullopt;
}

std::optional<std::string> standalone_letter(std::string_view text, const std::vector<Option>& options) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (!std::isupper(static_cast<unsigned char>(c)) || !has_label(options, c)) continue;
        const bool left = i == 0 || !is_alnum(text[i - 1]);
        const bool right = i + 1 >= text.size() || !is_alnum(text[i + 1]);
        if (left && right) return std::string(1, c);
    }
    return std::nullopt;
}

std::optional<std::string> verbatim_option(std::string_view text, const std::vector<Option>& options) {
    std::optional<std::string> best;
    std::size_t best_pos = std::string_view::npos;
    std::size_t best_len = 0;
    for (const auto& o : options) {
        if (o.text.empty()) continue;
        const auto pos = text.find(o.text);
        if (pos == std::string_view::npos) continue;
        if (pos < best_pos || (pos == best_pos && o.text.size() > best_len)) {
            best = o.label;
            best_pos = pos;
            best_len = o.text.size();
        }
    }
    return best;
}

} // namespace

RefineTemplate load_refine_template(const std::string& path) {
    auto sections = load_sections(path);
    RefineTemplate t{sections["refine"], sections["zero_shot"], sections["answer_directive"]};
    if (t.instructions.empty()) throw ConfigError(fmt::format("refine template '{}' has no [refine]", path));
    return t;
}

std::string render_step_text(const MultimodalRationale& item) {
    const auto& step = item.step;
    std::string out = fmt::format("Step {}: {}\nOperation: {}", step.index, step.subgoal, display_name(step.action));
    if (step.target) out += fmt::format(" on '{}'", *step.target);
    if (item.visual) out += fmt::format("\nResult: {}", item.visual->caption);
    if (item.failure) out += fmt::format("\nThe operation failed: {}", *item.failure);
    out += "\nRationale: " + item.textual;
    return out;
}

std::vector<ChatMessage> build_refine_prompt(const Task& task, const RationaleSeries& series, RationaleMode mode,
                                             const RefineTemplate& tmpl, std::size_t max_images) {
    if (mode == RationaleMode::ZeroShot) throw InvalidArgument("zero-shot mode has no refinement request");

    // Which items keep their image.
    std::vector<bool> keep(series.items.size(), false);
    std::size_t kept = 0;
    if (mode == RationaleMode::Hybrid) {
        for (std::size_t i = 0; i < series.items.size(); ++i) {
            keep[i] = series.items[i].visual.has_value();
            kept += keep[i] ? 1 : 0;
        }
        if (max_images > 0) {
            for (std::size_t i = 0; i < keep.size() && kept + 1 > max_images; ++i) {
                if (!keep[i]) continue;
                keep[i] = false;
                --kept;
            }
        }
    }

    std::vector<Part> parts;
    for (std::size_t i = 0; i < series.items.size(); ++i) {
        const auto& item = series.items[i];
        parts.emplace_back(TextPart{render_step_text(item)});
        if (keep[i]) parts.emplace_back(ImagePart{item.visual->image});
    }
    parts.emplace_back(TextPart{question_block(task, tmpl)});
    parts.emplace_back(ImagePart{task.image});
    return {ChatMessage::system(tmpl.instructions), ChatMessage::user(std::move(parts))};
}

std::vector<ChatMessage> build_zero_shot_prompt(const Task& task, const RefineTemplate& tmpl) {
    std::vector<ChatMessage> out;
    if (!tmpl.zero_shot_instructions.empty()) out.push_back(ChatMessage::system(tmpl.zero_shot_instructions));
    out.push_back(ChatMessage::user({TextPart{question_block(task, tmpl)}, ImagePart{task.image}}));
    return out;
}

std::optional<std::string> extract_choice(std::string_view answer_text, const std::vector<Option>& options) {
    if (options.empty()) return std::nullopt;
    if (auto c = answer_marker(answer_text, options)) return c;
    if (auto c = standalone_letter(answer_text, options)) return c;
    return verbatim_option(answer_text, options);
}

std::string_view to_string(YesNo v) noexcept {
    switch (v) {
    case YesNo::Yes: return "yes";
    case YesNo::No: return "no";
    case YesNo::Unknown: return "unknown";
    }
    return "unknown";
}

YesNo normalize_yesno(std::string_view answer_text) {
    std::string cleaned;
    cleaned.reserve(answer_text.size());
    for (char ch : answer_text) {
        const auto c = static_cast<unsigned char>(ch);
        cleaned.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : ' ');
    }
    std::istringstream in(cleaned);
    std::vector<std::string> tokens{std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
    if (tokens.empty()) return YesNo::Unknown;
    if (tokens.front() == "yes") return YesNo::Yes;
    if (tokens.front() == "no") return YesNo::No;

    const bool yes = std::find(tokens.begin(), tokens.end(), "yes") != tokens.end();
    const bool no = std::find(tokens.begin(), tokens.end(), "no") != tokens.end();
    if (yes && !no) return YesNo::Yes;
    if (no && !yes) return YesNo::No;
    return YesNo::Unknown;
}

} // namespace vistrace::refiner
