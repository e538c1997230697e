// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/core/error.hpp"
#include "vistrace/core/types.hpp"
#include "vistrace/gateway/gateway.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vistrace::planner {

class PlanParseError : public Error {
public:
    using Error::Error;
};

struct PlanPromptTemplate {
    std::string preamble;
    std::string action_catalog;
    std::string output_format_instructions;
};

/// One line per ActionKind: canonical name, target requirement, effect.
[[nodiscard]] std::string default_action_catalog();

/// Reads `[preamble]`, `[action_catalog]` and `[output_format]` sections. A
/// missing or empty catalog falls back to default_action_catalog().
[[nodiscard]] PlanPromptTemplate load_plan_template(const std::filesystem::path& path);

/// "Question: ..." followed by an "Options:" block when the task has options.
[[nodiscard]] std::string format_question(const Task& task);

/// System message (preamble, catalog, format instructions) plus one user
/// message holding the question text and then the image.
[[nodiscard]] std::vector<gateway::ChatMessage> build_plan_prompt(const Task& task,
                                                                  const PlanPromptTemplate& tmpl);

/// Parses model output into a plan. First tries fenced blocks holding a JSON
/// array (or {"steps": [...]}) of {subgoal, action, target[, params]}; then
/// falls back to lines shaped like
///
///     1. <subgoal> | <action> | <target>
///     Step 2: <subgoal> | <action>
///
/// where the number may end in '.', ')' or ':' and the target column is
/// optional for actions that do not need one. Steps with unknown actions or
/// missing required targets are dropped with a warning; steps are renumbered
/// from 1 and anything past `max_steps` is truncated with a warning.
/// Throws PlanParseError when no valid step remains.
[[nodiscard]] Plan parse_plan(std::string_view model_text, std::size_t max_steps = kDefaultMaxSteps);

/// Requests the textual rationale for one executed step: the user message is
/// the sub-goal text followed by the step's visual rationale, or by the
/// original image plus a failure note when the step produced no visual.
[[nodiscard]] gateway::ChatExchange generate_textual_rationale(
    const Task& task, const PlanStep& step, const VisualRationale* visual, std::optional<std::string> failure_note,
    gateway::Gateway& gateway, std::string_view instructions, const gateway::DecodeSettings& settings = {});

} // namespace vistrace::planner
