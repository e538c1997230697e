// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-question traces on disk:
//
//     <root>/<task_id>/manifest.json   step records, answer, fingerprints, config
//     <root>/<task_id>/input.png       the question image
//     <root>/<task_id>/step_<i>.png    visual rationale of step i, when it has one
//
// A directory is written under a temporary name and renamed into place, so
// readers never see half a trace.

#include "vistrace/actions/engine.hpp"
#include "vistrace/core/error.hpp"
#include "vistrace/core/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vistrace::trace {

inline constexpr std::string_view kSchema = "vistrace.trace/1";

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class CorruptTrace : public Error {
public:
    using Error::Error;
};

/// What happened when a step ran: an outcome, or the reason there is none.
struct StepExecution {
    std::optional<actions::ActionOutcome> outcome;
    std::optional<std::string> failure;
};

/// Zips plan steps, executions and textual rationales into the series,
/// ordered by step index. Throws LengthMismatch unless all three agree.
[[nodiscard]] RationaleSeries assemble_series(const Plan& plan, const std::vector<StepExecution>& executions,
                                              const std::vector<std::string>& rationales);

struct StepRecord {
    int index = 0;
    std::string subgoal;
    ActionKind action = ActionKind::ColorTransform;
    std::optional<std::string> target;
    bool degraded = false;
    std::optional<std::string> failure;
    std::string textual_rationale;
    std::optional<std::string> visual_file;
    std::optional<std::string> caption;
    std::optional<std::vector<Box>> annotations;

    bool operator==(const StepRecord&) const = default;
};

/// Model request that contributed to the answer, by pipeline stage
/// ("plan", "rationale_<i>", "refine", "zero_shot").
struct ExchangeRecord {
    std::string stage;
    std::string fingerprint;

    bool operator==(const ExchangeRecord&) const = default;
};

struct TraceManifest {
    /// Pixels are not serialized; they live in input.png.
    Task task;
    std::optional<Plan> plan;
    std::optional<std::string> plan_error;
    std::vector<StepRecord> steps;
    FinalAnswer final_answer;
    std::vector<ExchangeRecord> exchanges;
    std::map<std::string, std::string> tool_versions;
    nlohmann::json config = nlohmann::json::object();
    std::string created_at;

    bool operator==(const TraceManifest&) const = default;
};

void to_json(nlohmann::json& j, const StepRecord& v);
void from_json(const nlohmann::json& j, StepRecord& v);
void to_json(nlohmann::json& j, const ExchangeRecord& v);
void from_json(const nlohmann::json& j, ExchangeRecord& v);
void to_json(nlohmann::json& j, const TraceManifest& v);
void from_json(const nlohmann::json& j, TraceManifest& v);

/// Step images keyed by step index.
using StepImages = std::map<int, ImageData>;

/// Manifest and images for one answered task. Step records point at
/// `step_<i>.png` whenever the series item carries a visual.
[[nodiscard]] std::pair<TraceManifest, StepImages> build_manifest(const Task& task, const std::optional<Plan>& plan,
                                                                  const RationaleSeries& series,
                                                                  const FinalAnswer& answer);

/// UTC, second resolution, e.g. "2024-05-01T12:00:00Z".
[[nodiscard]] std::string utc_timestamp();

/// Manifest text as written to disk.
[[nodiscard]] std::string render_manifest(const TraceManifest& manifest);

/// Manifest JSON with `created_at` removed, for run-to-run comparison.
[[nodiscard]] nlohmann::json comparable(const nlohmann::json& manifest_json);

/// Writes `<root>/<task id>/` and returns that path. An existing trace for
/// the same id is replaced. Throws IoError, including for ids that are not a
/// single safe path component, and InvalidArgument when a step record names a
/// visual file with no matching image.
std::filesystem::path write_trace(const std::filesystem::path& root, const TraceManifest& manifest,
                                  const StepImages& images);

struct LoadedTrace {
    TraceManifest manifest;
    StepImages images;
};

/// Inverse of write_trace. Throws NotFound or CorruptTrace.
[[nodiscard]] LoadedTrace load_trace(const std::filesystem::path& root, const std::string& task_id);

/// Manifest only, without decoding images. Throws NotFound or CorruptTrace.
[[nodiscard]] TraceManifest load_manifest(const std::filesystem::path& root, const std::string& task_id);

/// Ids of every complete trace under `root`, sorted. Empty when `root` is missing.
[[nodiscard]] std::vector<std::string> list_traces(const std::filesystem::path& root);

} // namespace vistrace::trace
