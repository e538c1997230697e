// SPDX-License-Identifier: Apache-2.0
#include "vistrace/core/json.hpp"

#include "vistrace/image/codec.hpp"

namespace vistrace {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (auto it = j.find(key); it != j.end() && !it->is_null())
        v = it->template get<T>();
    else
        v.reset();
}

} // namespace

void to_json(json& j, const ImageData& v) {
    j = json{{"width", v.width}, {"height", v.height}, {"channels", v.channels}, {"png", image::to_png_base64(v)}};
}

void from_json(const json& j, ImageData& v) {
    v = image::from_base64(j.at("png").get<std::string>());
}

void to_json(json& j, const Option& v) { j = json{{"label", v.label}, {"text", v.text}}; }

void from_json(const json& j, Option& v) {
    j.at("label").get_to(v.label);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const Task& v) {
    j = task_snapshot(v);
    j["image"] = v.image;
}

void from_json(const json& j, Task& v) {
    j.at("id").get_to(v.id);
    j.at("question").get_to(v.question);
    j.at("image").get_to(v.image);
    v.options = j.value("options", std::vector<Option>{});
    get_optional(j, "gold_answer", v.gold_answer);
    get_optional(j, "category", v.category);
}

json task_snapshot(const Task& task) {
    json j{{"id", task.id}, {"question", task.question}, {"options", task.options}};
    put_optional(j, "gold_answer", task.gold_answer);
    put_optional(j, "category", task.category);
    return j;
}

void to_json(json& j, const ActionKind& v) { j = std::string(to_string(v)); }

void from_json(const json& j, ActionKind& v) { v = alias_action(j.get<std::string>()); }

void to_json(json& j, const PlanStep& v) {
    j = json{{"index", v.index}, {"subgoal", v.subgoal}, {"action", v.action}};
    put_optional(j, "target", v.target);
    if (!v.params.empty()) j["params"] = v.params;
}

void from_json(const json& j, PlanStep& v) {
    j.at("index").get_to(v.index);
    j.at("subgoal").get_to(v.subgoal);
    j.at("action").get_to(v.action);
    get_optional(j, "target", v.target);
    v.params = j.value("params", std::map<std::string, double>{});
}

void to_json(json& j, const Plan& v) {
    j = json{{"steps", v.steps}, {"raw_model_text", v.raw_model_text}, {"warnings", v.warnings}};
}

void from_json(const json& j, Plan& v) {
    j.at("steps").get_to(v.steps);
    j.at("raw_model_text").get_to(v.raw_model_text);
    v.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const Box& v) {
    j = json{{"x0", v.x0}, {"y0", v.y0}, {"x1", v.x1}, {"y1", v.y1}, {"score", v.score}, {"label", v.label}};
}

void from_json(const json& j, Box& v) {
    j.at("x0").get_to(v.x0);
    j.at("y0").get_to(v.y0);
    j.at("x1").get_to(v.x1);
    j.at("y1").get_to(v.y1);
    j.at("score").get_to(v.score);
    v.label = j.value("label", std::string{});
}

void to_json(json& j, const VisualRationale& v) {
    j = json{{"image", v.image}, {"producer", v.producer}, {"caption", v.caption}};
    put_optional(j, "annotations", v.annotations);
}

void from_json(const json& j, VisualRationale& v) {
    j.at("image").get_to(v.image);
    j.at("producer").get_to(v.producer);
    j.at("caption").get_to(v.caption);
    get_optional(j, "annotations", v.annotations);
}

void to_json(json& j, const MultimodalRationale& v) {
    j = json{{"step", v.step}, {"textual", v.textual}, {"degraded", v.degraded}};
    put_optional(j, "visual", v.visual);
    put_optional(j, "failure", v.failure);
}

void from_json(const json& j, MultimodalRationale& v) {
    j.at("step").get_to(v.step);
    j.at("textual").get_to(v.textual);
    v.degraded = j.value("degraded", false);
    get_optional(j, "visual", v.visual);
    get_optional(j, "failure", v.failure);
}

void to_json(json& j, const RationaleSeries& v) { j = json{{"items", v.items}}; }

void from_json(const json& j, RationaleSeries& v) { j.at("items").get_to(v.items); }

void to_json(json& j, const RationaleMode& v) { j = std::string(to_string(v)); }

void from_json(const json& j, RationaleMode& v) { v = parse_rationale_mode(j.get<std::string>()); }

void to_json(json& j, const FinalAnswer& v) {
    j = json{{"text", v.text}, {"mode", v.mode}, {"fallback", v.fallback}};
    put_optional(j, "choice", v.choice);
}

void from_json(const json& j, FinalAnswer& v) {
    j.at("text").get_to(v.text);
    j.at("mode").get_to(v.mode);
    v.fallback = j.value("fallback", false);
    get_optional(j, "choice", v.choice);
}

} // namespace vistrace
