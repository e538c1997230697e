// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/bench/dataset.hpp"
#include "vistrace/bench/pipeline.hpp"
#include "vistrace/gateway/gateway.hpp"
#include "vistrace/tools/client.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vistrace::testing {

/// Repository test fixture directory.
std::filesystem::path fixture_root();

/// Fresh empty directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

ImageData random_image(std::mt19937& rng, int w, int h, int channels = 3);

/// Model stand-in answering through a callback.
class ScriptedTransport final : public gateway::ChatTransport {
public:
    using Responder = std::function<std::string(const std::vector<gateway::ChatMessage>&)>;
    explicit ScriptedTransport(Responder responder) : responder_(std::move(responder)) {}

    gateway::ChatExchange complete(const std::vector<gateway::ChatMessage>& messages,
                                   const gateway::DecodeSettings& settings) override;
    [[nodiscard]] std::string id() const override { return "scripted"; }

private:
    Responder responder_;
};

/// Tool client whose every call fails with the given kind.
class FailingToolClient final : public tools::ToolClient {
public:
    explicit FailingToolClient(tools::ToolError::Kind kind) : kind_(kind) {}
    [[nodiscard]] std::string describe() const override { return "failing"; }

protected:
    tools::ToolResponse do_call(const tools::ToolRequest&) override;
    tools::Health do_health() override { return {false, "failing"}; }

private:
    tools::ToolError::Kind kind_;
};

struct ConformanceCase {
    std::string name;
    std::string request;
    nlohmann::json expect;
};

/// Cases of tests/fixtures/tool_conformance/corpus.json.
std::vector<ConformanceCase> conformance_corpus();

/// Empty when an HTTP reply satisfies the case, otherwise what differed.
std::optional<std::string> conformance_mismatch(const ConformanceCase& c, int status, const std::string& body);

/// Protocol-valid request with random action, image, query and id.
tools::ToolRequest random_tool_request(std::mt19937& rng);

/// Random valid plan of 1..max_steps steps; subgoals and targets avoid '|'.
Plan random_plan(std::mt19937& rng, std::size_t max_steps = kDefaultMaxSteps);

/// Renders a plan the way a model might: a fenced JSON block or numbered
/// lines, with randomly chosen aliases, numbering styles and chatter.
std::string render_plan_text(const Plan& plan, std::mt19937& rng);

/// Steps and targets equal, ignoring raw text and warnings.
bool same_steps(const Plan& a, const Plan& b);

struct ProseCase {
    std::string name;
    std::string text;
    /// (canonical action, target); empty optional means a parse error is expected.
    std::optional<std::vector<std::pair<std::string, std::optional<std::string>>>> expect;
};

/// Cases of tests/fixtures/plans/prose_cases.json.
std::vector<ProseCase> prose_cases();

/// Empty when parse_plan agrees with the case, otherwise the difference.
std::optional<std::string> prose_mismatch(const ProseCase& c);

/// The stub backend served over HTTP on an ephemeral localhost port.
class StubToolServer {
public:
    /// `delay` is slept inside every tool handler.
    explicit StubToolServer(std::chrono::milliseconds delay = std::chrono::milliseconds(0));
    ~StubToolServer();
    StubToolServer(const StubToolServer&) = delete;
    StubToolServer& operator=(const StubToolServer&) = delete;

    [[nodiscard]] std::string url() const;
    [[nodiscard]] int max_concurrent() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Text of the first text part of the last user message.
std::string user_text(const std::vector<gateway::ChatMessage>& messages);
/// Text of the system message, empty when absent.
std::string system_text(const std::vector<gateway::ChatMessage>& messages);

// The bundled benchmark fixture: two multiple-choice tasks, two yes/no
// image pairs and two judged tasks, with a deterministic model script.
namespace bench_fixture {

struct Script {
    std::string plan;
    std::string hybrid;
    std::string text_only;
    std::string zero_shot;
};

std::vector<Task> tasks(bench::BenchmarkKind kind);
/// Model replies keyed by question text.
const std::map<std::string, Script>& scripts();
/// Judge scores keyed by prediction text.
const std::map<std::string, std::string>& judge_replies();

/// Answers every request the pipeline makes for the fixture tasks.
ScriptedTransport::Responder responder(const bench::PromptSet& prompts);

std::filesystem::path dir();
std::filesystem::path dataset_path(bench::BenchmarkKind kind);
std::filesystem::path responses_dir();

/// Writes datasets and recorded responses for every kind and mode under `root`.
void generate(const std::filesystem::path& root, const bench::PromptSet& prompts);

} // namespace bench_fixture

} // namespace vistrace::testing
