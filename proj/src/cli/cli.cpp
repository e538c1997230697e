// SPDX-License-Identifier: Apache-2.0
#include "vistrace/cli/cli.hpp"

#include "vistrace/bench/pipeline.hpp"
#include "vistrace/bench/report.hpp"
#include "vistrace/core/encoding.hpp"
#include "vistrace/core/sections.hpp"
#include "vistrace/gateway/live.hpp"
#include "vistrace/image/codec.hpp"
#include "vistrace/tools/client.hpp"

#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/core.h>

namespace vistrace::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void from_file(const json& file, const char* key, T& dst) {
    auto it = file.find(key);
    if (it == file.end() || it->is_null()) return;
    try {
        dst = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
}

std::string excerpt(std::string_view text, std::size_t limit) {
    std::string out;
    for (char c : text) out.push_back(c == '\n' || c == '\t' ? ' ' : c);
    if (out.size() > limit) out = out.substr(0, limit - 3) + "...";
    return out;
}

std::string html_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string link(const fs::path& file, const fs::path& html_dir) {
    std::error_code ec;
    auto rel = fs::proximate(file, html_dir, ec);
    return (ec ? file : rel).generic_string();
}

json read_config_file(const std::optional<std::string>& path) {
    if (!path) return json::object();
    json j = json::parse(read_text_file(*path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError(fmt::format("config file '{}' is not a JSON object", *path));
    return j;
}

struct Session {
    CliConfig config;
    std::shared_ptr<gateway::Gateway> gateway;
    std::shared_ptr<tools::ToolClient> tools;
    bench::PromptSet prompts;
    bench::PipelineConfig pipeline;
    std::string fixture_fingerprint;
};

Session open_session(const CliConfig& config) {
    config.validate();
    Session s;
    s.config = config;
    s.gateway = std::make_shared<gateway::Gateway>(make_transport(config));
    s.tools = tools::make_tool_client(config.tools);
    s.prompts = bench::PromptSet::load(config.prompts.value_or(bench::default_prompt_dir()));
    if (config.fixtures) s.fixture_fingerprint = gateway::directory_fingerprint(*config.fixtures);
    s.pipeline.mode = config.mode;
    s.pipeline.max_steps = config.max_steps;
    s.pipeline.max_images_per_request = config.max_images_per_request;
    s.pipeline.trace_dir = config.out / "traces";
    s.pipeline.snapshot = config.snapshot();
    s.pipeline.snapshot["fixture_fingerprint"] = s.fixture_fingerprint;
    return s;
}

bench::RunMetadata metadata(const Session& s) {
    return bench::RunMetadata{std::string(to_string(s.config.mode)), s.config.model, s.fixture_fingerprint};
}

int cmd_ask(const CliConfig& config, const std::string& image_path, const std::string& question,
            const std::vector<std::string>& options, const std::optional<std::string>& kind_flag, std::ostream& out,
            std::ostream& err) {
    Task task;
    task.image = image::read_file(image_path);
    task.question = question;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (i >= 26) throw ConfigError("at most 26 options");
        task.options.push_back(Option{std::string(1, static_cast<char>('A' + i)), options[i]});
    }
    std::string seed = bench::image_key(task.image) + "\n" + question;
    for (const auto& o : options) seed += "\n" + o;
    task.id = "ask-" + sha256_hex(seed).substr(0, 12);

    const auto kind = kind_flag ? bench::parse_benchmark_kind(*kind_flag)
                                : (options.empty() ? bench::BenchmarkKind::OpenEndedJudged
                                                   : bench::BenchmarkKind::MultipleChoice);
    auto session = open_session(config);
    const auto run = bench::answer_task(task, kind, session.pipeline, *session.gateway, *session.tools, session.prompts);
    if (run.result.error) {
        err << "error: " << *run.result.error << "\n";
        return kExitError;
    }
    const auto& answer = run.result.answer;
    out << "answer: " << answer.text << "\n";
    if (answer.choice) out << "choice: " << *answer.choice << "\n";
    if (answer.fallback) out << "fallback: zero-shot\n";
    if (run.trace_path) out << "trace: " << run.trace_path->string() << "\n";
    return answer.fallback ? kExitFallback : kExitOk;
}

int cmd_bench(const CliConfig& config, const std::string& dataset, const std::string& kind_text,
              const std::vector<std::string>& formats, std::ostream& out) {
    const auto kind = bench::parse_benchmark_kind(kind_text);
    auto session = open_session(config);
    const auto tasks = bench::load_dataset(dataset, kind);
    const auto run = bench::run_benchmark(tasks, kind, session.pipeline, *session.gateway, *session.tools,
                                          session.prompts, config.workers, metadata(session));

    std::size_t failed = 0;
    std::size_t fallbacks = 0;
    for (const auto& r : run.results) {
        failed += r.error ? 1 : 0;
        fallbacks += r.answer.fallback ? 1 : 0;
    }
    out << fmt::format("{} ({}): aggregate {} over {} items; {} fallback, {} failed\n", to_string(kind),
                       to_string(config.mode), json(run.report.aggregate).dump(), run.report.items, fallbacks, failed);
    for (const auto& name : formats) {
        const auto format = bench::parse_report_format(name);
        const auto path = config.out / (std::string("report") + std::string(bench::file_extension(format)));
        bench::write_text(path, bench::emit_report(run.report, format));
        out << "report: " << path.string() << "\n";
    }
    return kExitOk;
}

int cmd_trace(const CliConfig& config, const std::optional<std::string>& traces, const std::string& id,
              const std::optional<std::string>& html, std::ostream& out) {
    const fs::path root = traces ? fs::path(*traces) : config.out / "traces";
    const auto loaded = trace::load_trace(root, id);
    out << render_trace(loaded, root / id);
    if (html) {
        const fs::path html_path(*html);
        const auto html_dir = html_path.has_parent_path() ? html_path.parent_path() : fs::path(".");
        bench::write_text(html_path, render_html(loaded.manifest, root / id, html_dir));
        out << "html: " << html_path.string() << "\n";
    }
    return kExitOk;
}

int cmd_stats(const CliConfig& config, const std::optional<std::string>& traces, const std::string& format_text,
              const std::optional<std::string>& report, std::ostream& out) {
    const fs::path root = traces ? fs::path(*traces) : config.out / "traces";
    const auto format = bench::parse_report_format(format_text);
    const auto counts = bench::tally_traces(root);
    const auto text = bench::emit_action_counts(counts, format);
    out << text;
    if (report) bench::write_text(*report, text);
    return kExitOk;
}

} // namespace

std::string_view to_string(TransportKind kind) noexcept {
    switch (kind) {
    case TransportKind::Live: return "live";
    case TransportKind::Record: return "record";
    case TransportKind::Replay: return "replay";
    }
    return "replay";
}

TransportKind parse_transport(std::string_view text) {
    if (text == "live") return TransportKind::Live;
    if (text == "record") return TransportKind::Record;
    if (text == "replay") return TransportKind::Replay;
    throw ConfigError(fmt::format("unknown transport '{}' (live, record or replay)", text));
}

void CliConfig::validate() const {
    if ((transport == TransportKind::Replay || transport == TransportKind::Record) && !fixtures)
        throw ConfigError(fmt::format("{} transport needs a fixture directory (--fixtures)", to_string(transport)));
    if (transport != TransportKind::Replay && (endpoint.empty() || api_key.empty()))
        throw ConfigError(fmt::format("{} transport needs an endpoint and an API key", to_string(transport)));
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (max_steps == 0) throw ConfigError("max_steps must be at least 1");
}

json CliConfig::snapshot() const {
    return json{{"transport", to_string(transport)},
                {"model", model},
                {"tools", tools},
                {"mode", to_string(mode)},
                {"max_steps", max_steps},
                {"max_images_per_request", max_images_per_request}};
}

std::optional<std::string> process_env(const char* name) {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
}

CliConfig resolve_config(const json& file, const EnvLookup& env, const CliOverrides& flags) {
    CliConfig c;
    std::string transport = std::string(to_string(c.transport));
    std::string mode = std::string(to_string(c.mode));
    std::optional<std::string> fixtures;
    std::string out = c.out.string();
    std::optional<std::string> prompts;

    from_file(file, "transport", transport);
    from_file(file, "fixtures", fixtures);
    from_file(file, "endpoint", c.endpoint);
    from_file(file, "api_key", c.api_key);
    from_file(file, "model", c.model);
    from_file(file, "tools", c.tools);
    from_file(file, "mode", mode);
    from_file(file, "workers", c.workers);
    from_file(file, "max_steps", c.max_steps);
    from_file(file, "max_images_per_request", c.max_images_per_request);
    from_file(file, "rate_limit", c.rate_limit_rpm);
    from_file(file, "out", out);
    from_file(file, "prompts", prompts);

    if (auto v = env("VISTRACE_TRANSPORT")) transport = *v;
    if (auto v = env("VISTRACE_FIXTURES")) fixtures = *v;
    if (auto v = env("VISTRACE_ENDPOINT")) c.endpoint = *v;
    if (auto v = env("VISTRACE_API_KEY")) c.api_key = *v;
    if (auto v = env("VISTRACE_MODEL")) c.model = *v;

    if (flags.transport) transport = *flags.transport;
    if (flags.fixtures) fixtures = *flags.fixtures;
    if (flags.endpoint) c.endpoint = *flags.endpoint;
    if (flags.api_key) c.api_key = *flags.api_key;
    if (flags.model) c.model = *flags.model;
    if (flags.tools) c.tools = *flags.tools;
    if (flags.mode) mode = *flags.mode;
    if (flags.workers) c.workers = *flags.workers;
    if (flags.max_steps) c.max_steps = *flags.max_steps;
    if (flags.max_images_per_request) c.max_images_per_request = *flags.max_images_per_request;
    if (flags.rate_limit_rpm) c.rate_limit_rpm = *flags.rate_limit_rpm;
    if (flags.out) out = *flags.out;
    if (flags.prompts) prompts = *flags.prompts;

    c.transport = parse_transport(transport);
    try {
        c.mode = parse_rationale_mode(mode);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (fixtures) c.fixtures = fs::path(*fixtures);
    c.out = out;
    if (prompts) c.prompts = fs::path(*prompts);
    return c;
}

std::shared_ptr<gateway::ChatTransport> make_transport(const CliConfig& config) {
    config.validate();
    if (config.transport == TransportKind::Replay) return std::make_shared<gateway::ReplayTransport>(*config.fixtures);

    gateway::LiveConfig live;
    live.endpoint = config.endpoint;
    live.api_key = config.api_key;
    live.model = config.model;
    live.requests_per_minute = config.rate_limit_rpm;
    auto transport = std::make_shared<gateway::LiveTransport>(live);
    if (config.transport == TransportKind::Live) return transport;
    return std::make_shared<gateway::RecordingTransport>(transport, *config.fixtures);
}

std::string render_trace(const trace::LoadedTrace& loaded, const fs::path& trace_dir) {
    const auto& m = loaded.manifest;
    std::string out = fmt::format("trace {}\nquestion: {}\n", m.task.id, m.task.question);
    for (const auto& o : m.task.options) out += fmt::format("  {}. {}\n", o.label, o.text);
    out += fmt::format("mode: {}  answer: {}", to_string(m.final_answer.mode), excerpt(m.final_answer.text, 80));
    if (m.final_answer.choice) out += fmt::format("  choice: {}", *m.final_answer.choice);
    if (m.final_answer.fallback) out += "  (zero-shot fallback)";
    out += "\n";
    if (m.plan_error) out += fmt::format("plan error: {}\n", *m.plan_error);

    out += fmt::format("\n{:>3}  {:<27}  {:<32}  {:<8}  {}\n", "#", "action", "subgoal", "degraded", "rationale");
    for (const auto& s : m.steps) {
        out += fmt::format("{:>3}  {:<27}  {:<32}  {:<8}  {}\n", s.index, to_string(s.action), excerpt(s.subgoal, 32),
                           s.degraded ? "yes" : (s.failure ? "failed" : "no"), excerpt(s.textual_rationale, 60));
    }

    out += "\nimages:\n";
    if (loaded.manifest.task.image.valid()) out += fmt::format("  input   {}\n", (trace_dir / "input.png").string());
    for (const auto& s : m.steps) {
        if (s.visual_file) out += fmt::format("  step {}  {}\n", s.index, (trace_dir / *s.visual_file).string());
    }
    return out;
}

std::string render_html(const trace::TraceManifest& m, const fs::path& trace_dir, const fs::path& html_dir) {
    std::string out = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>trace " + html_escape(m.task.id) +
                      "</title>\n<style>body{font-family:sans-serif;max-width:60em;margin:2em auto}"
                      "figure{margin:1em 0;border-top:1px solid #ccc;padding-top:1em}"
                      "img{max-width:100%}.degraded{color:#a00}</style></head><body>\n";
    out += "<h1>" + html_escape(m.task.question) + "</h1>\n";
    if (!m.task.options.empty()) {
        out += "<ol type=\"A\">\n";
        for (const auto& o : m.task.options) out += "<li>" + html_escape(o.text) + "</li>\n";
        out += "</ol>\n";
    }
    out += "<img src=\"" + html_escape(link(trace_dir / "input.png", html_dir)) + "\" alt=\"input\">\n";
    for (const auto& s : m.steps) {
        out += fmt::format("<figure id=\"step-{}\">\n<h2>Step {}: {}</h2>\n<p>{}", s.index, s.index,
                           html_escape(s.subgoal), html_escape(display_name(s.action)));
        if (s.target) out += " on &lsquo;" + html_escape(*s.target) + "&rsquo;";
        out += "</p>\n";
        if (s.visual_file) {
            out += "<img src=\"" + html_escape(link(trace_dir / *s.visual_file, html_dir)) + "\" alt=\"step " +
                   std::to_string(s.index) + "\">\n";
        }
        if (s.caption) out += "<figcaption>" + html_escape(*s.caption) + "</figcaption>\n";
        if (s.failure) out += "<p class=\"degraded\">" + html_escape(*s.failure) + "</p>\n";
        out += "<p>" + html_escape(s.textual_rationale) + "</p>\n</figure>\n";
    }
    out += "<h2>Answer</h2>\n<p>" + html_escape(m.final_answer.text) + "</p>\n";
    if (m.final_answer.choice) out += "<p>Choice: " + html_escape(*m.final_answer.choice) + "</p>\n";
    out += "</body></html>\n";
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Plan image operations, reason over their results, and answer visual questions."};
    app.name("vistrace");
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_path;
    CliOverrides flags;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--transport", flags.transport, "live, record or replay");
    app.add_option("--fixtures", flags.fixtures, "recorded model responses");
    app.add_option("--endpoint", flags.endpoint, "chat completions URL");
    app.add_option("--api-key", flags.api_key, "API key (prefer VISTRACE_API_KEY)");
    app.add_option("--model", flags.model, "model id sent to the endpoint");
    app.add_option("--tools", flags.tools, "\"stub\" or the tool service base URL");
    app.add_option("--mode", flags.mode, "hybrid, text-only or zero-shot");
    app.add_option("--workers", flags.workers, "parallel tasks");
    app.add_option("--max-steps", flags.max_steps, "plan length cap");
    app.add_option("--max-images", flags.max_images_per_request, "images per refinement request, 0 = no cap");
    app.add_option("--rate-limit", flags.rate_limit_rpm, "live requests per minute");
    app.add_option("--out", flags.out, "output directory for traces and reports");
    app.add_option("--prompts", flags.prompts, "prompt template directory");

    auto* ask = app.add_subcommand("ask", "answer one question about one image");
    std::string image_path;
    std::string question;
    std::vector<std::string> options;
    std::optional<std::string> ask_kind;
    ask->add_option("--image", image_path, "PNG or JPEG file")->required();
    ask->add_option("--question", question)->required();
    ask->add_option("--option", options, "answer option; repeat for B, C, ...");
    ask->add_option("--kind", ask_kind, "multiple-choice, yes-no or judged");

    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark dataset and score it");
    std::string dataset;
    std::string kind;
    std::vector<std::string> formats{"json", "csv", "markdown"};
    bench_cmd->add_option("--dataset", dataset, "TSV file")->required();
    bench_cmd->add_option("--kind", kind, "multiple-choice, yes-no or judged")->required();
    bench_cmd->add_option("--format", formats, "report formats")->capture_default_str();

    auto* trace_cmd = app.add_subcommand("trace", "show a stored trace");
    std::string trace_id;
    std::optional<std::string> trace_root;
    std::optional<std::string> html;
    trace_cmd->add_option("task_id", trace_id)->required();
    trace_cmd->add_option("--traces", trace_root, "trace directory (default <out>/traces)");
    trace_cmd->add_option("--export-html", html, "write a static HTML gallery here");

    auto* stats_cmd = app.add_subcommand("stats", "count planned actions across traces");
    std::optional<std::string> stats_root;
    std::string stats_format = "markdown";
    std::optional<std::string> stats_report;
    stats_cmd->add_option("--traces", stats_root, "trace directory (default <out>/traces)");
    stats_cmd->add_option("--format", stats_format, "json, csv or markdown")->capture_default_str();
    stats_cmd->add_option("--report", stats_report, "also write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitError;
    }

    try {
        const auto config = resolve_config(read_config_file(config_path), env, flags);
        if (ask->parsed()) return cmd_ask(config, image_path, question, options, ask_kind, out, err);
        if (bench_cmd->parsed()) return cmd_bench(config, dataset, kind, formats, out);
        if (trace_cmd->parsed()) return cmd_trace(config, trace_root, trace_id, html, out);
        if (stats_cmd->parsed()) return cmd_stats(config, stats_root, stats_format, stats_report, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

} // namespace vistrace::cli
