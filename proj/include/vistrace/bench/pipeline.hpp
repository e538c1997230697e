// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/actions/engine.hpp"
#include "vistrace/bench/score.hpp"
#include "vistrace/gateway/gateway.hpp"
#include "vistrace/planner/planner.hpp"
#include "vistrace/refiner/refiner.hpp"
#include "vistrace/tools/client.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace vistrace::bench {

/// Prompt assets, one directory:
///
///     plan_multiple_choice.txt  plan_yes_no.txt  plan_open_ended.txt
///         [preamble] [action_catalog] [output_format]
///     rationale.txt   [rationale]
///     refine.txt      [refine] [zero_shot]
///                     [answer_multiple_choice] [answer_yes_no] [answer_open_ended]
///     judge_v1.txt    [system] [user]
struct PromptSet {
    std::map<BenchmarkKind, planner::PlanPromptTemplate> plan;
    std::string rationale_instructions;
    std::map<BenchmarkKind, refiner::RefineTemplate> refine;
    JudgeTemplate judge;

    /// Throws ConfigError or IoError.
    static PromptSet load(const std::filesystem::path& dir);
};

/// Bundled prompt directory of this build.
[[nodiscard]] std::filesystem::path default_prompt_dir();

struct PipelineConfig {
    RationaleMode mode = RationaleMode::Hybrid;
    std::size_t max_steps = kDefaultMaxSteps;
    /// Cap on images per refinement request; 0 = unlimited.
    std::size_t max_images_per_request = 0;
    gateway::DecodeSettings decode;
    actions::ActionConfig actions;
    /// Traces are written here when set.
    std::optional<std::filesystem::path> trace_dir;
    /// Copied into every trace manifest.
    nlohmann::json snapshot = nlohmann::json::object();
    /// When false, manifests carry an empty `created_at`.
    bool timestamps = true;
};

struct TaskRun {
    TaskResult result;
    std::optional<Plan> plan;
    RationaleSeries series;
    std::optional<std::filesystem::path> trace_path;
};

/// One task through the whole pipeline. Hybrid and TextOnly: plan, run each
/// step, ask for each step's textual rationale, refine. ZeroShot: a single
/// model request. An unparseable plan falls back to the zero-shot request
/// with `fallback` set, as does a plan whose steps all failed to produce an
/// image. Model or tool errors mark the result with `error` instead of
/// throwing; ConfigError propagates.
[[nodiscard]] TaskRun answer_task(const Task& task, BenchmarkKind kind, const PipelineConfig& config,
                                  gateway::Gateway& gateway, tools::ToolClient& tools, const PromptSet& prompts);

/// Turns model text into the final answer for the benchmark style.
[[nodiscard]] FinalAnswer interpret_answer(std::string text, const Task& task, BenchmarkKind kind, RationaleMode mode,
                                           bool fallback);

struct BenchmarkRun {
    std::vector<TaskResult> results;
    ScoreReport report;
};

/// Runs every task on `workers` threads (results keep input order), then
/// scores. Judged benchmarks send judge requests through `gateway` too.
[[nodiscard]] BenchmarkRun run_benchmark(const std::vector<Task>& tasks, BenchmarkKind kind,
                                         const PipelineConfig& config, gateway::Gateway& gateway,
                                         tools::ToolClient& tools, const PromptSet& prompts, std::size_t workers = 4,
                                         RunMetadata metadata = {});

/// Scores results with the scorer for `kind`.
[[nodiscard]] ScoreReport score(const std::vector<TaskResult>& results, BenchmarkKind kind, gateway::Gateway& judge,
                                const PromptSet& prompts, const gateway::DecodeSettings& settings = {});

/// Planned actions of every trace under `root`, grouped by task category.
/// Traces without a plan contribute their category with no actions.
/// Throws trace::NotFound when `root` holds no traces.
[[nodiscard]] ActionCounts tally_traces(const std::filesystem::path& root);

} // namespace vistrace::bench
