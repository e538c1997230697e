// SPDX-License-Identifier: Apache-2.0
#include "vistrace/trace/trace.hpp"

#include "vistrace/core/json.hpp"
#include "vistrace/core/sections.hpp"
#include "vistrace/image/codec.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <random>

#include <fmt/chrono.h>
#include <fmt/core.h>

namespace vistrace::trace {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) v = it->get<T>();
    else v.reset();
}

bool safe_component(const std::string& id) {
    if (id.empty() || id == "." || id == ".." || id.front() == '.') return false;
    return std::none_of(id.begin(), id.end(), [](char c) {
        return c == '/' || c == '\\' || static_cast<unsigned char>(c) < 0x20;
    });
}

std::string unique_suffix() {
    static std::atomic<unsigned> counter{0};
    thread_local std::mt19937_64 rng{std::random_device{}()};
    return fmt::format("{:x}-{}", rng(), counter.fetch_add(1));
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot create '{}'", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError(fmt::format("short write to '{}'", path.string()));
}

void write_png(const fs::path& path, const ImageData& img) {
    const auto bytes = image::encode_png(img);
    write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string step_file(int index) { return fmt::format("step_{}.png", index); }

} // namespace

RationaleSeries assemble_series(const Plan& plan, const std::vector<StepExecution>& executions,
                                const std::vector<std::string>& rationales) {
    if (plan.steps.size() != executions.size() || plan.steps.size() != rationales.size()) {
        throw LengthMismatch(fmt::format("{} steps, {} executions, {} rationales", plan.steps.size(),
                                         executions.size(), rationales.size()));
    }
    RationaleSeries series;
    series.items.reserve(plan.steps.size());
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        MultimodalRationale item;
        item.step = plan.steps[i];
        item.textual = rationales[i];
        if (const auto& outcome = executions[i].outcome) {
            item.visual = outcome->visual;
            item.degraded = outcome->degraded;
            if (outcome->degraded) item.failure = outcome->note;
        } else {
            item.failure = executions[i].failure.value_or("step produced no output");
        }
        series.items.push_back(std::move(item));
    }
    std::stable_sort(series.items.begin(), series.items.end(),
                     [](const auto& a, const auto& b) { return a.step.index < b.step.index; });
    return series;
}

void to_json(json& j, const StepRecord& v) {
    j = json{{"index", v.index},
             {"subgoal", v.subgoal},
             {"action", v.action},
             {"degraded", v.degraded},
             {"textual_rationale", v.textual_rationale}};
    put_optional(j, "target", v.target);
    put_optional(j, "failure", v.failure);
    put_optional(j, "visual_file", v.visual_file);
    put_optional(j, "caption", v.caption);
    put_optional(j, "annotations", v.annotations);
}

void from_json(const json& j, StepRecord& v) {
    j.at("index").get_to(v.index);
    j.at("subgoal").get_to(v.subgoal);
    j.at("action").get_to(v.action);
    j.at("degraded").get_to(v.degraded);
    j.at("textual_rationale").get_to(v.textual_rationale);
    get_optional(j, "target", v.target);
    get_optional(j, "failure", v.failure);
    get_optional(j, "visual_file", v.visual_file);
    get_optional(j, "caption", v.caption);
    get_optional(j, "annotations", v.annotations);
}

void to_json(json& j, const ExchangeRecord& v) { j = json{{"stage", v.stage}, {"fingerprint", v.fingerprint}}; }

void from_json(const json& j, ExchangeRecord& v) {
    j.at("stage").get_to(v.stage);
    j.at("fingerprint").get_to(v.fingerprint);
}

void to_json(json& j, const TraceManifest& v) {
    j = json{{"schema", kSchema},
             {"task", task_snapshot(v.task)},
             {"steps", v.steps},
             {"final_answer", v.final_answer},
             {"exchanges", v.exchanges},
             {"tool_versions", v.tool_versions},
             {"config", v.config},
             {"created_at", v.created_at}};
    put_optional(j, "plan", v.plan);
    put_optional(j, "plan_error", v.plan_error);
}

void from_json(const json& j, TraceManifest& v) {
    if (j.value("schema", std::string()) != kSchema)
        throw CorruptTrace(fmt::format("unsupported trace schema '{}'", j.value("schema", std::string())));
    const auto& t = j.at("task");
    v.task = Task{};
    t.at("id").get_to(v.task.id);
    t.at("question").get_to(v.task.question);
    v.task.options = t.value("options", std::vector<Option>{});
    get_optional(t, "gold_answer", v.task.gold_answer);
    get_optional(t, "category", v.task.category);
    get_optional(j, "plan", v.plan);
    get_optional(j, "plan_error", v.plan_error);
    j.at("steps").get_to(v.steps);
    j.at("final_answer").get_to(v.final_answer);
    j.at("exchanges").get_to(v.exchanges);
    j.at("tool_versions").get_to(v.tool_versions);
    v.config = j.at("config");
    v.created_at = j.value("created_at", std::string());
}

std::pair<TraceManifest, StepImages> build_manifest(const Task& task, const std::optional<Plan>& plan,
                                                    const RationaleSeries& series, const FinalAnswer& answer) {
    TraceManifest m;
    m.task = task;
    m.plan = plan;
    m.final_answer = answer;
    StepImages images;
    for (const auto& item : series.items) {
        StepRecord r;
        r.index = item.step.index;
        r.subgoal = item.step.subgoal;
        r.action = item.step.action;
        r.target = item.step.target;
        r.degraded = item.degraded;
        r.failure = item.failure;
        r.textual_rationale = item.textual;
        if (item.visual) {
            r.visual_file = step_file(item.step.index);
            r.caption = item.visual->caption;
            r.annotations = item.visual->annotations;
            images[item.step.index] = item.visual->image;
        }
        m.steps.push_back(std::move(r));
    }
    return {std::move(m), std::move(images)};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

std::string render_manifest(const TraceManifest& manifest) { return json(manifest).dump(2) + "\n"; }

json comparable(const json& manifest_json) {
    auto copy = manifest_json;
    copy.erase("created_at");
    return copy;
}

fs::path write_trace(const fs::path& root, const TraceManifest& manifest, const StepImages& images) {
    const auto& id = manifest.task.id;
    if (!safe_component(id)) throw IoError(fmt::format("task id '{}' is not usable as a directory name", id));
    for (const auto& step : manifest.steps) {
        if (step.visual_file && !images.count(step.index))
            throw InvalidArgument(fmt::format("step {} names {} but has no image", step.index, *step.visual_file));
    }

    const fs::path final_dir = root / id;
    const fs::path tmp_dir = root / fmt::format(".{}.tmp-{}", id, unique_suffix());
    try {
        fs::create_directories(root);
        fs::create_directory(tmp_dir);
        write_file(tmp_dir / "manifest.json", render_manifest(manifest));
        if (manifest.task.image.valid()) write_png(tmp_dir / "input.png", manifest.task.image);
        for (const auto& step : manifest.steps) {
            if (step.visual_file) write_png(tmp_dir / *step.visual_file, images.at(step.index));
        }

        if (fs::exists(final_dir)) {
            const fs::path old_dir = root / fmt::format(".{}.old-{}", id, unique_suffix());
            fs::rename(final_dir, old_dir);
            fs::rename(tmp_dir, final_dir);
            fs::remove_all(old_dir);
        } else {
            fs::rename(tmp_dir, final_dir);
        }
    } catch (const fs::filesystem_error& e) {
        std::error_code ignored;
        fs::remove_all(tmp_dir, ignored);
        throw IoError(fmt::format("cannot write trace '{}': {}", id, e.what()));
    } catch (const IoError&) {
        std::error_code ignored;
        fs::remove_all(tmp_dir, ignored);
        throw;
    }
    return final_dir;
}

TraceManifest load_manifest(const fs::path& root, const std::string& task_id) {
    if (!safe_component(task_id)) throw NotFound(fmt::format("no trace for '{}'", task_id));
    const fs::path path = root / task_id / "manifest.json";
    if (!fs::is_regular_file(path)) throw NotFound(fmt::format("no trace for '{}' under '{}'", task_id, root.string()));
    try {
        return json::parse(read_text_file(path)).get<TraceManifest>();
    } catch (const json::exception& e) {
        throw CorruptTrace(fmt::format("manifest for '{}' is unreadable: {}", task_id, e.what()));
    } catch (const UnknownAction& e) {
        throw CorruptTrace(fmt::format("manifest for '{}': {}", task_id, e.what()));
    }
}

LoadedTrace load_trace(const fs::path& root, const std::string& task_id) {
    LoadedTrace out{load_manifest(root, task_id), {}};
    const fs::path dir = root / task_id;
    auto read_png = [&](const std::string& name) {
        const fs::path p = dir / name;
        if (!fs::is_regular_file(p)) throw CorruptTrace(fmt::format("trace '{}' is missing {}", task_id, name));
        try {
            return image::read_file(p);
        } catch (const Error& e) {
            throw CorruptTrace(fmt::format("trace '{}': {}", task_id, e.what()));
        }
    };
    if (fs::exists(dir / "input.png")) out.manifest.task.image = read_png("input.png");
    for (const auto& step : out.manifest.steps) {
        if (step.visual_file) out.images[step.index] = read_png(*step.visual_file);
    }
    return out;
}

std::vector<std::string> list_traces(const fs::path& root) {
    std::vector<std::string> ids;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return ids;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        const auto name = entry.path().filename().string();
        if (!entry.is_directory() || !safe_component(name)) continue;
        if (fs::is_regular_file(entry.path() / "manifest.json")) ids.push_back(name);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace vistrace::trace
