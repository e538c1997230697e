// SPDX-License-Identifier: Apache-2.0
#include "vistrace/bench/pipeline.hpp"

#include "vistrace/core/sections.hpp"
#include "vistrace/trace/trace.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/core.h>

#ifndef VISTRACE_ASSET_DIR
#define VISTRACE_ASSET_DIR "assets"
#endif

namespace vistrace::bench {

namespace fs = std::filesystem;

namespace {

std::string_view plan_file(BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return "plan_multiple_choice.txt";
    case BenchmarkKind::YesNoPaired: return "plan_yes_no.txt";
    case BenchmarkKind::OpenEndedJudged: return "plan_open_ended.txt";
    }
    return "";
}

std::string_view directive_section(BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return "answer_multiple_choice";
    case BenchmarkKind::YesNoPaired: return "answer_yes_no";
    case BenchmarkKind::OpenEndedJudged: return "answer_open_ended";
    }
    return "";
}

struct Recorder {
    std::vector<trace::ExchangeRecord> exchanges;

    std::string complete(gateway::Gateway& gw, std::string stage, const std::vector<gateway::ChatMessage>& messages,
                         const gateway::DecodeSettings& settings) {
        auto ex = gw.complete(messages, settings);
        exchanges.push_back(trace::ExchangeRecord{std::move(stage), ex.fingerprint});
        return std::move(ex.response_text);
    }
};

} // namespace

PromptSet PromptSet::load(const fs::path& dir) {
    PromptSet set;
    for (auto kind : kAllKinds) {
        set.plan[kind] = planner::load_plan_template(dir / plan_file(kind));
    }
    auto rationale = load_sections(dir / "rationale.txt");
    set.rationale_instructions = rationale["rationale"];
    if (set.rationale_instructions.empty())
        throw ConfigError(fmt::format("'{}' has no [rationale]", (dir / "rationale.txt").string()));

    auto refine = load_sections(dir / "refine.txt");
    if (refine["refine"].empty()) throw ConfigError(fmt::format("'{}' has no [refine]", (dir / "refine.txt").string()));
    for (auto kind : kAllKinds) {
        set.refine[kind] =
            refiner::RefineTemplate{refine["refine"], refine["zero_shot"], refine[std::string(directive_section(kind))]};
    }
    set.judge = load_judge_template(dir / "judge_v1.txt");
    return set;
}

fs::path default_prompt_dir() { return fs::path(VISTRACE_ASSET_DIR) / "prompts"; }

FinalAnswer interpret_answer(std::string text, const Task& task, BenchmarkKind kind, RationaleMode mode,
                             bool fallback) {
    FinalAnswer answer;
    answer.mode = mode;
    answer.fallback = fallback;
    switch (kind) {
    case BenchmarkKind::MultipleChoice:
        if (!task.options.empty()) answer.choice = refiner::extract_choice(text, task.options);
        break;
    case BenchmarkKind::YesNoPaired:
        if (auto yn = refiner::normalize_yesno(text); yn != refiner::YesNo::Unknown)
            answer.choice = std::string(refiner::to_string(yn));
        break;
    case BenchmarkKind::OpenEndedJudged: break;
    }
    answer.text = std::move(text);
    return answer;
}

TaskRun answer_task(const Task& task, BenchmarkKind kind, const PipelineConfig& config, gateway::Gateway& gateway,
                    tools::ToolClient& tools, const PromptSet& prompts) {
    TaskRun run;
    auto& result = run.result;
    result.task_id = task.id;
    result.question = task.question;
    result.options = task.options;
    result.category = task.category;
    result.gold = task.gold_answer;
    result.image_key = image_key(task.image);

    const auto& refine_tmpl = prompts.refine.at(kind);
    Recorder rec;
    std::optional<std::string> plan_error;
    RationaleSeries series;

    auto zero_shot = [&](bool fallback) {
        auto text = rec.complete(gateway, "zero_shot", refiner::build_zero_shot_prompt(task, refine_tmpl), config.decode);
        return interpret_answer(std::move(text), task, kind, config.mode, fallback);
    };

    try {
        if (config.mode == RationaleMode::ZeroShot) {
            result.answer = zero_shot(false);
        } else {
            const auto plan_text = rec.complete(gateway, "plan", planner::build_plan_prompt(task, prompts.plan.at(kind)),
                                                config.decode);
            try {
                run.plan = planner::parse_plan(plan_text, config.max_steps);
            } catch (const planner::PlanParseError& e) {
                plan_error = e.what();
            }

            if (!run.plan) {
                result.answer = zero_shot(true);
            } else {
                std::vector<trace::StepExecution> executions;
                std::vector<std::string> rationales;
                for (const auto& step : run.plan->steps) {
                    trace::StepExecution exec;
                    try {
                        exec.outcome = actions::execute(step, task.image, tools, config.actions);
                    } catch (const ConfigError&) {
                        throw;
                    } catch (const Error& e) {
                        exec.failure = e.what();
                    }
                    const VisualRationale* visual = exec.outcome ? &exec.outcome->visual : nullptr;
                    std::optional<std::string> note = exec.failure;
                    if (exec.outcome && exec.outcome->degraded) note = exec.outcome->note;
                    auto ex = planner::generate_textual_rationale(task, step, visual, note, gateway,
                                                                  prompts.rationale_instructions, config.decode);
                    rec.exchanges.push_back(trace::ExchangeRecord{fmt::format("rationale_{}", step.index), ex.fingerprint});
                    rationales.push_back(std::move(ex.response_text));
                    executions.push_back(std::move(exec));
                }
                series = trace::assemble_series(*run.plan, executions, rationales);

                const bool any_visual = std::any_of(series.items.begin(), series.items.end(),
                                                    [](const auto& item) { return item.visual.has_value(); });
                const RationaleSeries empty;
                const auto messages = refiner::build_refine_prompt(task, any_visual ? series : empty, config.mode,
                                                                   refine_tmpl, config.max_images_per_request);
                auto text = rec.complete(gateway, "refine", messages, config.decode);
                result.answer = interpret_answer(std::move(text), task, kind, config.mode, !any_visual);
                for (const auto& step : run.plan->steps) result.actions.push_back(step.action);
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        result.error = e.what();
        result.answer = FinalAnswer{"", std::nullopt, config.mode, false};
        return run;
    }
    run.series = series;

    if (config.trace_dir) {
        auto [manifest, images] = trace::build_manifest(task, run.plan, series, result.answer);
        manifest.plan_error = plan_error;
        manifest.exchanges = rec.exchanges;
        manifest.tool_versions["tools"] = tools.describe();
        manifest.tool_versions["gateway"] = gateway.transport_id();
        manifest.config = config.snapshot;
        if (config.timestamps) manifest.created_at = trace::utc_timestamp();
        run.trace_path = trace::write_trace(*config.trace_dir, manifest, images);
    }
    return run;
}

ScoreReport score(const std::vector<TaskResult>& results, BenchmarkKind kind, gateway::Gateway& judge,
                  const PromptSet& prompts, const gateway::DecodeSettings& settings) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return score_multiple_choice(results);
    case BenchmarkKind::YesNoPaired: return score_yesno_paired(results);
    case BenchmarkKind::OpenEndedJudged: return score_open_ended_judged(results, judge, prompts.judge, settings);
    }
    throw InvalidArgument("unknown benchmark kind");
}

BenchmarkRun run_benchmark(const std::vector<Task>& tasks, BenchmarkKind kind, const PipelineConfig& config,
                           gateway::Gateway& gateway, tools::ToolClient& tools, const PromptSet& prompts,
                           std::size_t workers, RunMetadata metadata) {
    BenchmarkRun run;
    run.results.resize(tasks.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (!stop.load()) {
            const auto i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                run.results[i] = answer_task(tasks[i], kind, config, gateway, tools, prompts).result;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };
    {
        const auto n = std::max<std::size_t>(1, std::min(workers, tasks.size()));
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    run.report = score(run.results, kind, gateway, prompts, config.decode);
    if (metadata.mode.empty()) metadata.mode = std::string(to_string(config.mode));
    run.report.metadata = std::move(metadata);
    return run;
}

ActionCounts tally_traces(const fs::path& root) {
    const auto ids = trace::list_traces(root);
    if (ids.empty()) throw trace::NotFound(fmt::format("no traces under '{}'", root.string()));
    ActionCounts counts;
    for (const auto& id : ids) {
        const auto manifest = trace::load_manifest(root, id);
        std::vector<ActionKind> actions;
        if (manifest.plan) {
            for (const auto& step : manifest.plan->steps) actions.push_back(step.action);
        }
        tally(counts, category_key(manifest.task.category), actions);
    }
    return counts;
}

} // namespace vistrace::bench
