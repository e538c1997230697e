// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/bench/dataset.hpp"
#include "vistrace/core/types.hpp"
#include "vistrace/gateway/gateway.hpp"
#include "vistrace/trace/trace.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace vistrace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFallback = 2;

enum class TransportKind { Live, Record, Replay };

[[nodiscard]] std::string_view to_string(TransportKind kind) noexcept;
/// Throws ConfigError.
[[nodiscard]] TransportKind parse_transport(std::string_view text);

struct CliConfig {
    TransportKind transport = TransportKind::Replay;
    std::optional<std::filesystem::path> fixtures;
    std::string endpoint;
    std::string api_key;
    std::string model;
    /// "stub" or a sidecar base URL.
    std::string tools = "stub";
    RationaleMode mode = RationaleMode::Hybrid;
    std::size_t workers = 4;
    std::size_t max_steps = kDefaultMaxSteps;
    std::size_t max_images_per_request = 0;
    double rate_limit_rpm = 60.0;
    std::filesystem::path out = "vistrace-out";
    std::optional<std::filesystem::path> prompts;

    /// Throws ConfigError: replay and record need a fixture directory; live
    /// and record need an endpoint and an API key.
    void validate() const;

    /// Settings that shape answers, embedded in every trace. Secrets excluded.
    [[nodiscard]] nlohmann::json snapshot() const;
};

/// Values given on the command line; unset fields fall through.
struct CliOverrides {
    std::optional<std::string> transport;
    std::optional<std::string> fixtures;
    std::optional<std::string> endpoint;
    std::optional<std::string> api_key;
    std::optional<std::string> model;
    std::optional<std::string> tools;
    std::optional<std::string> mode;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> max_steps;
    std::optional<std::size_t> max_images_per_request;
    std::optional<double> rate_limit_rpm;
    std::optional<std::string> out;
    std::optional<std::string> prompts;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Process environment.
[[nodiscard]] std::optional<std::string> process_env(const char* name);

/// Merges flags over environment (VISTRACE_ENDPOINT, VISTRACE_API_KEY,
/// VISTRACE_MODEL, VISTRACE_TRANSPORT, VISTRACE_FIXTURES) over the config
/// file (a JSON object with keys transport, fixtures, endpoint, api_key,
/// model, tools, mode, workers, max_steps, max_images_per_request,
/// rate_limit, out, prompts). Throws ConfigError on bad values.
[[nodiscard]] CliConfig resolve_config(const nlohmann::json& file, const EnvLookup& env,
                                       const CliOverrides& flags);

/// Builds the transport the config selects. Throws ConfigError.
[[nodiscard]] std::shared_ptr<gateway::ChatTransport> make_transport(const CliConfig& config);

/// Step table and image paths of a stored trace.
[[nodiscard]] std::string render_trace(const trace::LoadedTrace& loaded, const std::filesystem::path& trace_dir);

/// Self-contained HTML page showing the question, every step with its
/// image and rationale, and the final answer. Image links are relative to
/// `html_dir` where possible.
[[nodiscard]] std::string render_html(const trace::TraceManifest& manifest, const std::filesystem::path& trace_dir,
                                      const std::filesystem::path& html_dir);

/// Entry point of the `vistrace` binary. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env = process_env);

} // namespace vistrace::cli
