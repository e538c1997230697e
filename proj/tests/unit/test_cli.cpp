// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "vistrace/cli/cli.hpp"
#include "vistrace/core/sections.hpp"
#include "vistrace/image/codec.hpp"

#include <gtest/gtest.h>

#include <fmt/core.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <sys/wait.h>

using namespace vistrace;
namespace vt = vistrace::testing;
using namespace vistrace::cli;
namespace fs = std::filesystem;
namespace fixture = vistrace::testing::bench_fixture;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const char* name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

const EnvLookup kNoEnv = env_of({});

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args, const EnvLookup& env = kNoEnv) {
    args.insert(args.begin(), "vistrace");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err, env);
    return {code, out.str(), err.str()};
}

/// Writes the fixture image for `task` and returns its path.
fs::path write_image(const fs::path& dir, const Task& task) {
    const auto path = dir / (task.id + ".png");
    image::write_png(path, task.image);
    return path;
}

std::vector<std::string> replay_flags(const fs::path& out) {
    return {"--transport", "replay", "--fixtures", fixture::responses_dir().string(), "--out", out.string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST(Config, FlagsOverEnvOverFile) {
    const nlohmann::json file{{"transport", "live"}, {"endpoint", "http://file"}, {"model", "file-model"},
                              {"workers", 2},        {"mode", "text-only"},      {"api_key", "file-key"}};
    auto c = resolve_config(file, kNoEnv, {});
    EXPECT_EQ(c.transport, TransportKind::Live);
    EXPECT_EQ(c.endpoint, "http://file");
    EXPECT_EQ(c.workers, 2u);
    EXPECT_EQ(c.mode, RationaleMode::TextOnly);

    const auto env = env_of({{"VISTRACE_ENDPOINT", "http://env"}, {"VISTRACE_MODEL", "env-model"}});
    c = resolve_config(file, env, {});
    EXPECT_EQ(c.endpoint, "http://env");
    EXPECT_EQ(c.model, "env-model");

    CliOverrides flags;
    flags.endpoint = "http://flag";
    flags.workers = 7;
    c = resolve_config(file, env, flags);
    EXPECT_EQ(c.endpoint, "http://flag");
    EXPECT_EQ(c.model, "env-model");
    EXPECT_EQ(c.workers, 7u);
    EXPECT_EQ(c.api_key, "file-key");
}

TEST(Config, Defaults) {
    const auto c = resolve_config(nlohmann::json::object(), kNoEnv, {});
    EXPECT_EQ(c.transport, TransportKind::Replay);
    EXPECT_EQ(c.mode, RationaleMode::Hybrid);
    EXPECT_EQ(c.tools, "stub");
    EXPECT_FALSE(c.fixtures);
}

TEST(Config, ValidationAndBadValues) {
    EXPECT_THROW(resolve_config(nlohmann::json::object(), kNoEnv, {}).validate(), ConfigError);
    CliOverrides flags;
    flags.fixtures = "/tmp/fx";
    EXPECT_NO_THROW(resolve_config(nlohmann::json::object(), kNoEnv, flags).validate());
    flags.transport = "live";
    EXPECT_THROW(resolve_config(nlohmann::json::object(), kNoEnv, flags).validate(), ConfigError);
    flags.endpoint = "http://x";
    flags.api_key = "k";
    EXPECT_NO_THROW(resolve_config(nlohmann::json::object(), kNoEnv, flags).validate());
    flags.workers = 0;
    EXPECT_THROW(resolve_config(nlohmann::json::object(), kNoEnv, flags).validate(), ConfigError);

    EXPECT_THROW((void)resolve_config({{"transport", "carrier-pigeon"}}, kNoEnv, {}), ConfigError);
    EXPECT_THROW((void)resolve_config({{"mode", "telepathic"}}, kNoEnv, {}), ConfigError);
    EXPECT_THROW((void)resolve_config({{"workers", "many"}}, kNoEnv, {}), ConfigError);
}

TEST(Config, SnapshotHasNoSecrets) {
    CliOverrides flags;
    flags.api_key = "super-secret";
    flags.model = "m1";
    const auto snap = resolve_config(nlohmann::json::object(), kNoEnv, flags).snapshot();
    EXPECT_EQ(snap.dump().find("super-secret"), std::string::npos);
    EXPECT_EQ(snap.at("model"), "m1");
}

TEST(Cli, AskAnswersFromReplay) {
    vt::TempDir dir;
    const auto task = fixture::tasks(bench::BenchmarkKind::MultipleChoice)[0];
    const auto image = write_image(dir.path(), task);
    auto args = concat({"ask", "--image", image.string(), "--question", task.question}, {});
    for (const auto& o : task.options) args.insert(args.end(), {"--option", o.text});
    const auto r = invoke(concat(replay_flags(dir.path() / "out"), args));
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("choice: A"), std::string::npos) << r.out;
    const std::regex trace_line(R"(trace: .*ask-[0-9a-f]{12})");
    EXPECT_TRUE(std::regex_search(r.out, trace_line)) << r.out;
}

TEST(Cli, AskFallbackExitsWithTwo) {
    vt::TempDir dir;
    const auto task = fixture::tasks(bench::BenchmarkKind::YesNoPaired)[2];
    const auto image = write_image(dir.path(), task);
    const auto r = invoke(concat(replay_flags(dir.path() / "out"),
                                 {"ask", "--image", image.string(), "--question", task.question, "--kind", "yes-no"}));
    EXPECT_EQ(r.code, kExitFallback) << r.err;
    EXPECT_NE(r.out.find("fallback: zero-shot"), std::string::npos);
}

TEST(Cli, AskErrors) {
    vt::TempDir dir;
    auto r = invoke(concat(replay_flags(dir.path()), {"ask", "--image", (dir.path() / "none.png").string(),
                                                      "--question", "Q?"}));
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("error:"), std::string::npos);

    // An unrecorded question is a fixture miss, reported as an error.
    const auto image = write_image(dir.path(), fixture::tasks(bench::BenchmarkKind::MultipleChoice)[0]);
    r = invoke(concat(replay_flags(dir.path() / "out"),
                      {"ask", "--image", image.string(), "--question", "Never recorded?"}));
    EXPECT_EQ(r.code, kExitError);

    r = invoke({"ask", "--image", image.string(), "--question", "Q?"});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("fixture"), std::string::npos) << r.err;

    r = invoke({"ask"});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("usage error"), std::string::npos);
}

TEST(Cli, BenchTraceAndStats) {
    vt::TempDir dir;
    const auto out = dir.path() / "out";
    auto r = invoke(concat(replay_flags(out), {"bench", "--dataset",
                                               fixture::dataset_path(bench::BenchmarkKind::YesNoPaired).string(),
                                               "--kind", "yes-no"}));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("aggregate 125"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("1 fallback, 0 failed"), std::string::npos) << r.out;
    for (const char* name : {"report.json", "report.csv", "report.md"}) EXPECT_TRUE(fs::exists(out / name)) << name;
    const auto report = nlohmann::json::parse(read_text_file(out / "report.json")).get<bench::ScoreReport>();
    EXPECT_DOUBLE_EQ(report.aggregate, 125.0);
    EXPECT_EQ(report.metadata.mode, "hybrid");
    EXPECT_EQ(report.metadata.fixture_fingerprint, gateway::directory_fingerprint(fixture::responses_dir()));

    r = invoke(concat(replay_flags(out), {"trace", "yn-1a"}));
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("segmentation"), std::string::npos);
    EXPECT_NE(r.out.find("step_1.png"), std::string::npos);

    const auto html = dir.path() / "gallery" / "yn-1a.html";
    r = invoke(concat(replay_flags(out), {"trace", "yn-1a", "--export-html", html.string()}));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto page = read_text_file(html);
    EXPECT_NE(page.find("../out/traces/yn-1a/step_1.png"), std::string::npos) << page;
    EXPECT_NE(page.find("../out/traces/yn-1a/input.png"), std::string::npos);

    r = invoke(concat(replay_flags(out), {"trace", "no-such-task"}));
    EXPECT_EQ(r.code, kExitError);

    r = invoke(concat(replay_flags(out), {"stats", "--format", "csv"}));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("overall,segmentation,1"), std::string::npos) << r.out;

    r = invoke(concat(replay_flags(out), {"stats", "--traces", (dir.path() / "empty").string()}));
    EXPECT_EQ(r.code, kExitError);

    r = invoke(concat(replay_flags(out), {"bench", "--dataset", "x.tsv", "--kind", "trivia"}));
    EXPECT_EQ(r.code, kExitError);
}

TEST(Cli, HtmlEscapesText) {
    trace::TraceManifest m;
    m.task.id = "t";
    m.task.question = "Is <b> & \"this\" safe?";
    m.final_answer.text = "<script>";
    const auto page = render_html(m, "/traces/t", "/traces");
    EXPECT_EQ(page.find("<script>"), std::string::npos);
    EXPECT_NE(page.find("Is &lt;b&gt; &amp;"), std::string::npos);
    EXPECT_NE(page.find("src=\"t/input.png\""), std::string::npos);
}

TEST(Cli, BinaryExitCodes) {
    vt::TempDir dir;
    const auto task = fixture::tasks(bench::BenchmarkKind::YesNoPaired)[2];
    const auto image = write_image(dir.path(), task);
    auto status = [](const std::string& cmd) {
        const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    const std::string base = fmt::format("'{}' --transport replay --fixtures '{}' --out '{}'", VISTRACE_CLI_BINARY,
                                         fixture::responses_dir().string(), (dir.path() / "out").string());
    EXPECT_EQ(status(base + fmt::format(" ask --image '{}' --question '{}' --kind yes-no", image.string(), task.question)),
              kExitFallback);
    EXPECT_EQ(status(base + " trace missing"), kExitError);
    EXPECT_EQ(status(fmt::format("'{}' --help", VISTRACE_CLI_BINARY)), kExitOk);
}
