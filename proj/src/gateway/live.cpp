// SPDX-License-Identifier: Apache-2.0
#include "vistrace/gateway/live.hpp"

#include "vistrace/image/codec.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/core.h>
#include <httplib.h>

namespace vistrace::gateway {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string base; // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError(fmt::format("endpoint '{}' lacks a scheme", url));
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

} // namespace

HttpResult HttplibPoster::post(const std::string& url, const std::string& body,
                               const std::map<std::string, std::string>& headers,
                               std::chrono::milliseconds timeout) {
    const auto parts = split_url(url);
    httplib::Client client(parts.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(parts.path, h, body, "application/json");
    if (!res) {
        const auto err = res.error();
        HttpResult r;
        r.kind = err == httplib::Error::Read || err == httplib::Error::Write ||
                         err == httplib::Error::ConnectionTimeout
                     ? HttpResult::Kind::Timeout
                     : HttpResult::Kind::Connection;
        r.error = httplib::to_string(err);
        return r;
    }
    return HttpResult{HttpResult::Kind::Ok, res->status, res->body, {}};
}

TokenBucket::TokenBucket(double requests_per_minute, int burst)
    : interval_(requests_per_minute > 0.0
                    ? std::chrono::nanoseconds(static_cast<long long>(60e9 / requests_per_minute))
                    : std::chrono::nanoseconds(0)),
      burst_(burst < 1 ? 1 : burst) {}

TokenBucket::Clock::time_point TokenBucket::reserve(Clock::time_point now) {
    std::lock_guard lock(mutex_);
    if (!primed_) {
        next_free_ = now;
        primed_ = true;
    }
    const auto tat = std::max(next_free_, now);
    const auto slot = std::max(now, tat - (burst_ - 1) * interval_);
    next_free_ = tat + interval_;
    return slot;
}

void TokenBucket::acquire() { std::this_thread::sleep_until(reserve(Clock::now())); }

LiveConfig LiveConfig::from_env() {
    LiveConfig c;
    c.endpoint = env_or_empty("VISTRACE_ENDPOINT");
    c.api_key = env_or_empty("VISTRACE_API_KEY");
    c.model = env_or_empty("VISTRACE_MODEL");
    return c;
}

json chat_completions_body(const std::string& model, const std::vector<ChatMessage>& messages,
                           const DecodeSettings& settings) {
    json msgs = json::array();
    for (const auto& m : messages) {
        json content = json::array();
        for (const auto& p : m.parts) {
            if (const auto* t = std::get_if<TextPart>(&p)) {
                content.push_back({{"type", "text"}, {"text", t->text}});
            } else {
                const auto url = "data:image/png;base64," + image::to_png_base64(std::get<ImagePart>(p).image);
                content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
            }
        }
        msgs.push_back({{"role", to_string(m.role)}, {"content", std::move(content)}});
    }
    return json{{"model", model},
                {"messages", std::move(msgs)},
                {"temperature", settings.temperature},
                {"max_tokens", settings.max_tokens}};
}

std::string parse_chat_completions_response(const std::string& body) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw TransportError("model response is not JSON", 1);
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return content.get<std::string>();
        std::string out;
        for (const auto& part : content)
            if (part.value("type", "") == "text") out += part.value("text", "");
        return out;
    } catch (const json::exception& e) {
        throw TransportError(fmt::format("unexpected model response shape: {}", e.what()), 1);
    }
}

LiveTransport::LiveTransport(LiveConfig config, std::shared_ptr<HttpPoster> poster, Sleeper sleeper)
    : config_(std::move(config)),
      poster_(poster ? std::move(poster) : std::make_shared<HttplibPoster>()),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })),
      limiter_(config_.requests_per_minute) {
    if (config_.endpoint.empty()) throw ConfigError("live transport requires an endpoint URL");
    if (config_.api_key.empty()) throw ConfigError("live transport requires an API key");
    if (config_.max_attempts < 1) config_.max_attempts = 1;
}

ChatExchange LiveTransport::complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) {
    ChatExchange ex{messages, settings, {}, id(), request_fingerprint(messages, settings)};
    const auto body = chat_completions_body(config_.model, messages, settings).dump();
    const std::map<std::string, std::string> headers{{"Authorization", "Bearer " + config_.api_key}};

    const auto started = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (config_.requests_per_minute > 0.0) limiter_.acquire();
        const auto res = poster_->post(config_.endpoint, body, headers, config_.timeout);

        bool retry = false;
        if (res.kind == HttpResult::Kind::Timeout) {
            last_error = "timeout: " + res.error;
            retry = true;
        } else if (res.kind == HttpResult::Kind::Connection) {
            last_error = "connection: " + res.error;
            retry = true;
        } else if (res.status >= 200 && res.status < 300) {
            ex.response_text = parse_chat_completions_response(res.body);
            ex.attempts = attempt;
            ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                               started);
            return ex;
        } else {
            last_error = fmt::format("HTTP {}: {}", res.status, res.body.substr(0, 200));
            retry = retryable_status(res.status);
        }

        if (!retry) throw TransportError(last_error, attempt);
        if (attempt < config_.max_attempts) sleeper_(config_.backoff_base * (1 << (attempt - 1)));
    }
    throw TransportError(fmt::format("gave up after {} attempts: {}", config_.max_attempts, last_error),
                         config_.max_attempts);
}

} // namespace vistrace::gateway
