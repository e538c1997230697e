// SPDX-License-Identifier: Apache-2.0
#include "vistrace/planner/planner.hpp"

#include "vistrace/core/sections.hpp"

#include <cctype>
#include <regex>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace vistrace::planner {

using gateway::ChatMessage;
using gateway::ImagePart;
using gateway::TextPart;
using nlohmann::json;

namespace {

std::string_view action_blurb(ActionKind kind) {
    switch (kind) {
    case ActionKind::Segmentation: return "overlay a mask on the region of the named object";
    case ActionKind::EdgeDetection: return "highlight edges and contours across the whole image";
    case ActionKind::ZoomIn: return "crop and magnify the area around the named object";
    case ActionKind::DenseObjectDetection: return "draw boxes around every salient object in a crowded scene";
    case ActionKind::ReferringObjectDetection: return "draw boxes around the objects matching a phrase";
    case ActionKind::SpatialRuler: return "draw axes splitting the image into quadrants Q1 (top-left) to Q4 (bottom-left), clockwise";
    case ActionKind::ColorTransform: return "convert the image to grayscale";
    }
    return "";
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct Candidate {
    std::string subgoal;
    std::string action;
    std::optional<std::string> target;
    std::map<std::string, double> params;
};

/// Turns candidates into validated steps; returns how many were accepted.
std::vector<PlanStep> accept(const std::vector<Candidate>& candidates, std::vector<std::string>& warnings) {
    std::vector<PlanStep> steps;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        PlanStep step;
        try {
            step.action = alias_action(c.action);
        } catch (const UnknownAction&) {
            warnings.push_back(fmt::format("step {}: dropped, unknown action '{}'", i + 1, c.action));
            continue;
        }
        if (c.subgoal.empty()) {
            warnings.push_back(fmt::format("step {}: dropped, empty sub-goal", i + 1));
            continue;
        }
        if (c.target && !c.target->empty()) step.target = c.target;
        if (requires_target(step.action) && !step.target) {
            warnings.push_back(fmt::format("step {}: dropped, {} needs a target", i + 1, display_name(step.action)));
            continue;
        }
        step.subgoal = c.subgoal;
        step.params = c.params;
        steps.push_back(std::move(step));
    }
    return steps;
}

std::vector<std::string> fenced_blocks(std::string_view text) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string_view::npos) {
        const auto line_end = text.find('\n', pos);
        if (line_end == std::string_view::npos) break;
        const auto close = text.find("```", line_end + 1);
        if (close == std::string_view::npos) break;
        blocks.emplace_back(text.substr(line_end + 1, close - line_end - 1));
        pos = close + 3;
    }
    return blocks;
}

std::optional<std::vector<Candidate>> candidates_from_json(const std::string& block) {
    const auto j = json::parse(block, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    const json* list = &j;
    if (j.is_object() && j.contains("steps")) list = &j.at("steps");
    if (!list->is_array()) return std::nullopt;

    std::vector<Candidate> out;
    for (const auto& item : *list) {
        if (!item.is_object()) continue;
        Candidate c;
        if (auto it = item.find("subgoal"); it != item.end() && it->is_string()) c.subgoal = trim(it->get<std::string>());
        if (auto it = item.find("action"); it != item.end() && it->is_string()) c.action = it->get<std::string>();
        if (auto it = item.find("target"); it != item.end() && it->is_string()) c.target = trim(it->get<std::string>());
        if (auto it = item.find("params"); it != item.end() && it->is_object()) {
            for (const auto& [k, v] : it->items())
                if (v.is_number()) c.params[k] = v.get<double>();
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Candidate> candidates_from_lines(std::string_view text) {
    static const std::regex kLine(R"(^\s*(?:[-*]\s*)?(?:step\s*)?(\d+)\s*[.):]\s*(.+?)\s*$)", std::regex::icase);
    std::vector<Candidate> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::smatch m;
        if (!std::regex_match(line, m, kLine)) continue;
        const std::string rest = m[2].str();
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto bar = rest.find('|', start);
            fields.push_back(trim(rest.substr(start, bar == std::string::npos ? std::string::npos : bar - start)));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        if (fields.size() < 2 || fields.size() > 3) continue;
        Candidate c{fields[0], fields[1], std::nullopt, {}};
        if (fields.size() == 3 && !fields[2].empty()) c.target = fields[2];
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace

std::string default_action_catalog() {
    std::string out = "Available image operations (use the name on the left as \"action\"):\n";
    for (auto kind : kAllActions) {
        out += fmt::format("- {}{}: {}\n", to_string(kind), requires_target(kind) ? " (needs target)" : "",
                           action_blurb(kind));
    }
    out.pop_back();
    return out;
}

PlanPromptTemplate load_plan_template(const std::filesystem::path& path) {
    auto sections = load_sections(path);
    PlanPromptTemplate t;
    t.preamble = sections["preamble"];
    t.action_catalog = sections["action_catalog"];
    t.output_format_instructions = sections["output_format"];
    if (t.preamble.empty()) throw ConfigError(fmt::format("plan template '{}' has no [preamble]", path.string()));
    if (t.action_catalog.empty()) t.action_catalog = default_action_catalog();
    return t;
}

std::string format_question(const Task& task) {
    std::string out = "Question: " + task.question;
    if (!task.options.empty()) {
        out += "\nOptions:";
        for (const auto& o : task.options) out += fmt::format("\n{}. {}", o.label, o.text);
    }
    return out;
}

std::vector<ChatMessage> build_plan_prompt(const Task& task, const PlanPromptTemplate& tmpl) {
    std::string system = tmpl.preamble;
    for (const auto* part : {&tmpl.action_catalog, &tmpl.output_format_instructions}) {
        if (part->empty()) continue;
        system += "\n\n";
        system += *part;
    }
    return {ChatMessage::system(std::move(system)),
            ChatMessage::user({TextPart{format_question(task)}, ImagePart{task.image}})};
}

Plan parse_plan(std::string_view model_text, std::size_t max_steps) {
    Plan plan;
    plan.raw_model_text = std::string(model_text);

    std::vector<PlanStep> steps;
    for (const auto& block : fenced_blocks(model_text)) {
        auto candidates = candidates_from_json(block);
        if (!candidates) continue;
        steps = accept(*candidates, plan.warnings);
        if (!steps.empty()) break;
    }
    if (steps.empty()) {
        const auto candidates = candidates_from_lines(model_text);
        steps = accept(candidates, plan.warnings);
    }
    if (steps.empty()) {
        throw PlanParseError(plan.warnings.empty()
                                 ? std::string("model output contains no plan steps")
                                 : fmt::format("no valid plan steps ({})", plan.warnings.front()));
    }

    if (max_steps > 0 && steps.size() > max_steps) {
        plan.warnings.push_back(fmt::format("plan had {} steps; truncated to {}", steps.size(), max_steps));
        steps.resize(max_steps);
    }
    for (std::size_t i = 0; i < steps.size(); ++i) steps[i].index = static_cast<int>(i + 1);
    plan.steps = std::move(steps);
    return plan;
}

gateway::ChatExchange generate_textual_rationale(const Task& task, const PlanStep& step,
                                                 const VisualRationale* visual,
                                                 std::optional<std::string> failure_note, gateway::Gateway& gateway,
                                                 std::string_view instructions,
                                                 const gateway::DecodeSettings& settings) {
    std::string text = format_question(task);
    text += fmt::format("\nSub-goal {}: {}", step.index, step.subgoal);
    text += fmt::format("\nOperation: {}", display_name(step.action));
    if (step.target) text += fmt::format(" on '{}'", *step.target);
    if (visual) text += fmt::format("\nResult: {}", visual->caption);
    if (failure_note) text += fmt::format("\nNote: the operation failed ({}); the original image is shown instead.", *failure_note);

    const ImageData& shown = visual ? visual->image : task.image;
    std::vector<ChatMessage> messages;
    if (!instructions.empty()) messages.push_back(ChatMessage::system(std::string(instructions)));
    messages.push_back(ChatMessage::user({TextPart{std::move(text)}, ImagePart{shown}}));
    return gateway.complete(messages, settings);
}

} // namespace vistrace::planner
