// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "vistrace/bench/report.hpp"
#include "vistrace/core/encoding.hpp"
#include "vistrace/core/sections.hpp"
#include "vistrace/image/codec.hpp"
#include "vistrace/planner/planner.hpp"

#include <httplib.h>

#include <atomic>
#include <regex>
#include <thread>

#include <fmt/core.h>

#ifndef VISTRACE_TEST_FIXTURES
#error "VISTRACE_TEST_FIXTURES must point at tests/fixtures"
#endif

namespace vistrace::testing {

namespace fs = std::filesystem;
using bench::BenchmarkKind;
using gateway::ChatMessage;

fs::path fixture_root() { return fs::path(VISTRACE_TEST_FIXTURES); }

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() / fmt::format("vistrace-test-{:x}-{}", rd(), counter.fetch_add(1));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

ImageData random_image(std::mt19937& rng, int w, int h, int channels) {
    ImageData img(w, h, channels);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(byte(rng));
    return img;
}

gateway::ChatExchange ScriptedTransport::complete(const std::vector<ChatMessage>& messages,
                                                  const gateway::DecodeSettings& settings) {
    gateway::ChatExchange ex;
    ex.request = messages;
    ex.settings = settings;
    ex.response_text = responder_(messages);
    ex.transport_id = id();
    ex.fingerprint = gateway::request_fingerprint(messages, settings);
    return ex;
}

tools::ToolResponse FailingToolClient::do_call(const tools::ToolRequest&) {
    throw tools::ToolError(kind_, "scripted tool failure");
}

std::vector<ConformanceCase> conformance_corpus() {
    const auto j = nlohmann::json::parse(read_text_file(fixture_root() / "tool_conformance" / "corpus.json"));
    std::vector<ConformanceCase> out;
    for (const auto& c : j.at("cases"))
        out.push_back({c.at("name").get<std::string>(), c.at("request").get<std::string>(), c.at("expect")});
    return out;
}

std::optional<std::string> conformance_mismatch(const ConformanceCase& c, int status, const std::string& body) {
    const auto& e = c.expect;
    if (status != e.at("status").get<int>()) return fmt::format("status {} != {}", status, e.at("status").get<int>());
    if (auto it = e.find("body"); it != e.end()) {
        if (body != it->get<std::string>()) return fmt::format("body {} != {}", body, it->get<std::string>());
        return std::nullopt;
    }
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return "reply is not JSON: " + body;
    if (auto it = e.find("error_kind"); it != e.end()) {
        if (!j.contains("error") || j["error"].value("kind", "") != it->get<std::string>())
            return "wrong error reply: " + body;
        return std::nullopt;
    }
    const auto& ov = e.at("overlay");
    if (!j.contains("overlay")) return "missing overlay: " + body.substr(0, 200);
    const auto img = image::from_base64(j["overlay"].get<std::string>());
    if (img.width != ov.at("width").get<int>() || img.height != ov.at("height").get<int>() ||
        img.channels != ov.at("channels").get<int>())
        return fmt::format("overlay shape {}x{}x{}", img.width, img.height, img.channels);
    Sha256 h;
    h.update(img.pixels);
    if (h.hex_digest() != ov.at("pixels_sha256").get<std::string>()) return "overlay pixels differ";
    return std::nullopt;
}

tools::ToolRequest random_tool_request(std::mt19937& rng) {
    static const std::vector<std::string> kQueries{"cat", "the red bus", "caf\u00e9 sign", "say \"hi\"", "a\tb\nc",
                                                   "\xe6\x97\xa5\xe6\x9c\xac", "{}[]", "x"};
    const auto action = static_cast<tools::ToolAction>(rng() % 3);
    std::optional<std::string> query;
    if (action != tools::ToolAction::DetectDense) query = kQueries[rng() % kQueries.size()];
    const auto w = 1 + static_cast<int>(rng() % 12);
    const auto h = 1 + static_cast<int>(rng() % 12);
    auto req = tools::make_request(action, random_image(rng, w, h, rng() % 2 ? 3 : 4), query);
    if (rng() % 4 == 0) req.request_id = fmt::format("custom-{}", rng());
    return req;
}

Plan random_plan(std::mt19937& rng, std::size_t max_steps) {
    static const std::vector<std::string> kWords{"find", "the", "red", "bus", "sign", "count", "cars", "café",
                                                 "left", "tallest", "bar", "edge", "x", "dog's", "\"quoted\""};
    auto phrase = [&](std::size_t min_words) {
        std::string out;
        const auto n = min_words + rng() % 4;
        for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + kWords[rng() % kWords.size()];
        return out;
    };
    Plan plan;
    const auto n = 1 + rng() % max_steps;
    for (std::size_t i = 0; i < n; ++i) {
        PlanStep step;
        step.index = static_cast<int>(i + 1);
        step.subgoal = phrase(1);
        step.action = kAllActions[rng() % kAllActions.size()];
        if (requires_target(step.action) || rng() % 3 == 0) step.target = phrase(1);
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

std::string render_plan_text(const Plan& plan, std::mt19937& rng) {
    auto action_name = [&](ActionKind kind) {
        switch (rng() % 3) {
        case 0: return std::string(to_string(kind));
        case 1: return std::string(display_name(kind));
        default: {
            std::string upper(display_name(kind));
            for (auto& ch : upper) ch = ch == ' ' ? '-' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            return upper;
        }
        }
    };
    std::string out = rng() % 2 ? "Sure, here is the plan.\n\n" : "";
    if (rng() % 2) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : plan.steps) {
            nlohmann::json j{{"subgoal", s.subgoal}, {"action", action_name(s.action)}};
            if (s.target) j["target"] = *s.target;
            steps.push_back(std::move(j));
        }
        const nlohmann::json doc = rng() % 2 ? steps : nlohmann::json{{"steps", steps}};
        out += "```json\n" + doc.dump(rng() % 2 ? 2 : -1) + "\n```\n";
    } else {
        static const std::vector<std::string> kFormats{"{}. ", "{}) ", "Step {}: ", "- {}. ", "{}: "};
        for (const auto& s : plan.steps) {
            out += fmt::format(fmt::runtime(kFormats[rng() % kFormats.size()]), s.index);
            out += s.subgoal + " | " + action_name(s.action);
            if (s.target) out += " | " + *s.target;
            out += "\n";
        }
    }
    if (rng() % 2) out += "\nThis should answer the question.";
    return out;
}

bool same_steps(const Plan& a, const Plan& b) { return a.steps == b.steps; }

std::vector<ProseCase> prose_cases() {
    const auto j = nlohmann::json::parse(read_text_file(fixture_root() / "plans" / "prose_cases.json"));
    std::vector<ProseCase> out;
    for (const auto& c : j.at("cases")) {
        ProseCase pc{c.at("name").get<std::string>(), c.at("text").get<std::string>(), std::nullopt};
        if (c.at("expect").is_array()) {
            pc.expect.emplace();
            for (const auto& e : c.at("expect"))
                pc.expect->emplace_back(e.at(0).get<std::string>(),
                                        e.at(1).is_null() ? std::nullopt
                                                          : std::optional<std::string>(e.at(1).get<std::string>()));
        }
        out.push_back(std::move(pc));
    }
    return out;
}

std::optional<std::string> prose_mismatch(const ProseCase& c) {
    Plan plan;
    try {
        plan = planner::parse_plan(c.text);
    } catch (const planner::PlanParseError& e) {
        if (!c.expect) return std::nullopt;
        return std::string("unexpected parse error: ") + e.what();
    }
    if (!c.expect) return fmt::format("expected a parse error, got {} step(s)", plan.steps.size());
    if (plan.steps.size() != c.expect->size())
        return fmt::format("{} step(s), expected {}", plan.steps.size(), c.expect->size());
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& [action, target] = (*c.expect)[i];
        const auto& s = plan.steps[i];
        if (to_string(s.action) != action || s.target != target || s.index != static_cast<int>(i + 1))
            return fmt::format("step {} is {} '{}'", i + 1, to_string(s.action), s.target.value_or(""));
    }
    return std::nullopt;
}

struct StubToolServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
};

StubToolServer::StubToolServer(std::chrono::milliseconds delay) : impl_(std::make_unique<Impl>()) {
    auto* impl = impl_.get();
    impl->server.Post("/v1/tool", [impl, delay](const httplib::Request& req, httplib::Response& res) {
        const int now = impl->active.fetch_add(1) + 1;
        int prev = impl->peak.load();
        while (now > prev && !impl->peak.compare_exchange_weak(prev, now)) {
        }
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        const auto reply = tools::stub::handle_tool_post(req.body);
        impl->active.fetch_sub(1);
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    impl->server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(tools::stub::health_body(), "application/json");
    });
    impl->port = impl->server.bind_to_any_port("127.0.0.1");
    impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
    impl->server.wait_until_ready();
}

StubToolServer::~StubToolServer() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubToolServer::url() const { return fmt::format("http://127.0.0.1:{}", impl_->port); }
int StubToolServer::max_concurrent() const { return impl_->peak.load(); }

std::string user_text(const std::vector<ChatMessage>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role != gateway::Role::User) continue;
        for (const auto& part : it->parts)
            if (const auto* t = std::get_if<gateway::TextPart>(&part)) return t->text;
    }
    return {};
}

std::string system_text(const std::vector<ChatMessage>& messages) {
    for (const auto& m : messages)
        if (m.role == gateway::Role::System) return gateway::flatten_text(m);
    return {};
}

namespace bench_fixture {

namespace {

void fill(ImageData& img, int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> rgb) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            auto* p = img.at(x, y);
            p[0] = rgb[0];
            p[1] = rgb[1];
            p[2] = rgb[2];
        }
}

ImageData scene(int which) {
    ImageData img = ImageData::filled(96, 72, {128, 128, 128});
    switch (which) {
    case 0: // red bus on a grey road
        fill(img, 20, 30, 76, 56, {200, 30, 30});
        fill(img, 26, 34, 40, 42, {220, 230, 240});
        break;
    case 1: // blue square in the top-right quadrant
        img = ImageData::filled(96, 72, {250, 250, 250});
        fill(img, 60, 10, 84, 30, {20, 40, 200});
        fill(img, 8, 44, 30, 64, {30, 160, 40});
        break;
    case 2: // brown dog on grass
        img = ImageData::filled(96, 72, {60, 150, 60});
        fill(img, 30, 28, 66, 52, {120, 80, 40});
        break;
    case 3: // two cars under a sky
        img = ImageData::filled(96, 72, {140, 190, 240});
        fill(img, 8, 40, 40, 60, {220, 200, 20});
        fill(img, 54, 42, 88, 62, {20, 20, 20});
        break;
    case 4: // red sign with white band
        fill(img, 28, 16, 68, 56, {190, 20, 20});
        fill(img, 32, 32, 64, 40, {250, 250, 250});
        break;
    default: // bar chart
        img = ImageData::filled(96, 72, {255, 255, 255});
        fill(img, 10, 40, 24, 66, {40, 90, 200});
        fill(img, 34, 20, 48, 66, {40, 90, 200});
        fill(img, 58, 30, 72, 66, {40, 90, 200});
        break;
    }
    return img;
}

Task task(std::string id, std::string question, int image, std::string gold, std::string category,
          std::vector<Option> options = {}) {
    Task t;
    t.id = std::move(id);
    t.question = std::move(question);
    t.image = scene(image);
    t.options = std::move(options);
    t.gold_answer = std::move(gold);
    t.category = std::move(category);
    return t;
}

std::string question_of(const std::vector<ChatMessage>& messages) {
    const auto& user = messages.back();
    for (const auto& part : user.parts) {
        const auto* t = std::get_if<gateway::TextPart>(&part);
        if (!t) continue;
        const auto pos = t->text.find("Question: ");
        if (pos != 0 && (pos == std::string::npos || t->text[pos - 1] != '\n')) continue;
        const auto start = pos + 10;
        return t->text.substr(start, t->text.find('\n', start) - start);
    }
    throw Error("scripted model: request has no question");
}

std::string line_after(const std::string& text, const std::string& prefix) {
    const auto pos = text.find(prefix);
    if (pos == std::string::npos) return {};
    const auto start = pos + prefix.size();
    return text.substr(start, text.find('\n', start) - start);
}

} // namespace

std::vector<Task> tasks(BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice:
        return {task("mc-1", "What colour is the bus?", 0, "A", "attribute recognition",
                     {{"A", "red"}, {"B", "blue"}, {"C", "green"}, {"D", "yellow"}}),
                task("mc-2", "Which quadrant contains the blue square?", 1, "B", "object localization",
                     {{"A", "top-left"}, {"B", "top-right"}, {"C", "bottom-right"}, {"D", "bottom-left"}})};
    case BenchmarkKind::YesNoPaired:
        return {task("yn-1a", "Is there a dog in the image?", 2, "yes", "existence"),
                task("yn-1b", "Is there a cat in the image?", 2, "no", "existence"),
                task("yn-2a", "Are there two cars in the image?", 3, "yes", "existence"),
                task("yn-2b", "Are there three cars in the image?", 3, "no", "existence")};
    case BenchmarkKind::OpenEndedJudged:
        return {task("jd-1", "What does the sign say?", 4, "STOP", "rec,ocr,know"),
                task("jd-2", "Describe the chart and say which bar is tallest.", 5,
                     "A bar chart with three bars; the middle one is tallest.", "gen,spat,math")};
    }
    return {};
}

const std::map<std::string, Script>& scripts() {
    static const std::map<std::string, Script> kScripts{
        {"What colour is the bus?",
         {"I will locate the bus first.\n\n```json\n"
          "[{\"subgoal\": \"Find the bus\", \"action\": \"referring_object_detection\", \"target\": \"bus\"},\n"
          " {\"subgoal\": \"Look closely at the bus body\", \"action\": \"zoom_in\", \"target\": \"bus\"}]\n```\n",
          "Answer: A. The zoomed view shows a red body.", "Answer: A", "Answer: B"}},
        {"Which quadrant contains the blue square?",
         {"Plan:\n1. Split the image into quadrants | spatial ruler\n"
          "2) Find every shape | dense object detection\n"
          "Step 3: Confirm the square's outline | edge detection\n",
          "The correct option is (C) the bottom-right quadrant.", "Answer: B", "Answer: B"}},
        {"Is there a dog in the image?",
         {"```json\n{\"steps\": [{\"subgoal\": \"Mask the dog\", \"action\": \"segmentation\", \"target\": \"dog\"}]}\n```",
          "Yes, a dog is visible.", "Yes.", "Yes."}},
        {"Is there a cat in the image?",
         {"1. Look for a cat | object detection | cat", "No.", "No.", "Yes."}},
        {"Are there two cars in the image?",
         {"Just look at the image and count.", "Yes.", "Yes.", "Yes."}},
        {"Are there three cars in the image?",
         {"1. Find all vehicles | dense object detection", "Yes, I count three.", "No.", "No, there are two."}},
        {"What does the sign say?",
         {"1. Magnify the sign | zoom in | sign\n2. Trace the letter outlines | edge detection",
          "It says STOP.", "It says STOP.", "It says SLOW."}},
        {"Describe the chart and say which bar is tallest.",
         {"1. Split the chart into quadrants | spatial ruler\n2. Find the tallest bar | object detection | tallest bar",
          "A bar chart; the second bar is tallest.", "A bar chart with three bars; the middle one is tallest.",
          "A chart."}},
    };
    return kScripts;
}

const std::map<std::string, std::string>& judge_replies() {
    static const std::map<std::string, std::string> kReplies{
        {"It says STOP.", "1.0"},
        {"It says SLOW.", "0.0"},
        {"A bar chart; the second bar is tallest.", "0.5"},
        {"A bar chart with three bars; the middle one is tallest.", "1.0"},
        {"A chart.", "0.2"},
    };
    return kReplies;
}

ScriptedTransport::Responder responder(const bench::PromptSet& prompts) {
    return [&prompts](const std::vector<ChatMessage>& messages) -> std::string {
        const auto sys = system_text(messages);
        const auto& refine = prompts.refine.begin()->second;
        if (sys == prompts.judge.system) {
            const auto pred = line_after(user_text(messages), "Prediction: ");
            auto it = judge_replies().find(pred);
            return it == judge_replies().end() ? "0.0" : it->second;
        }
        if (sys == prompts.rationale_instructions) {
            const auto text = user_text(messages);
            return fmt::format("Sub-goal {} checked with {}: the processed image is consistent with the question.",
                               line_after(text, "Sub-goal ").substr(0, 1), line_after(text, "Operation: "));
        }
        const auto& script = scripts().at(question_of(messages));
        if (sys == refine.instructions) return messages.back().image_count() > 1 ? script.hybrid : script.text_only;
        if (sys == refine.zero_shot_instructions) return script.zero_shot;
        for (const auto& [kind, tmpl] : prompts.plan) {
            if (sys.rfind(tmpl.preamble, 0) == 0) return script.plan;
        }
        throw Error("scripted model: unrecognised request");
    };
}

fs::path dir() { return fixture_root() / "bench"; }

namespace {
std::string dataset_name(BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return "multiple_choice.tsv";
    case BenchmarkKind::YesNoPaired: return "yes_no.tsv";
    case BenchmarkKind::OpenEndedJudged: return "judged.tsv";
    }
    return "";
}
} // namespace

fs::path dataset_path(BenchmarkKind kind) { return dir() / dataset_name(kind); }
fs::path responses_dir() { return dir() / "responses"; }

void generate(const fs::path& root, const bench::PromptSet& prompts) {
    fs::create_directories(root);
    auto gw = std::make_shared<gateway::Gateway>(std::make_shared<gateway::RecordingTransport>(
        std::make_shared<ScriptedTransport>(responder(prompts)), root / "responses"));
    tools::StubToolClient tools;
    for (auto kind : bench::kAllKinds) {
        const auto set = tasks(kind);
        bench::write_text(root / dataset_name(kind), bench::render_dataset(set, kind));
        for (auto mode : {RationaleMode::Hybrid, RationaleMode::TextOnly, RationaleMode::ZeroShot}) {
            bench::PipelineConfig config;
            config.mode = mode;
            (void)bench::run_benchmark(set, kind, config, *gw, tools, prompts, 1);
        }
    }
}

} // namespace bench_fixture

} // namespace vistrace::testing
