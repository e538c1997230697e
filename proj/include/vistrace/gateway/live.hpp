// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/gateway/gateway.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>

namespace vistrace::gateway {

struct HttpResult {
    enum class Kind { Ok, Timeout, Connection };
    Kind kind = Kind::Ok;
    int status = 0;
    std::string body;
    std::string error;
};

/// Minimal POST abstraction so the retry logic can be tested without sockets.
class HttpPoster {
public:
    virtual ~HttpPoster() = default;
    virtual HttpResult post(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers,
                            std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed poster; supports http:// and https:// URLs.
class HttplibPoster final : public HttpPoster {
public:
    HttpResult post(const std::string& url, const std::string& body,
                    const std::map<std::string, std::string>& headers,
                    std::chrono::milliseconds timeout) override;
};

/// Token bucket admission control. `reserve` is the pure core: it books the
/// next admission slot at or after `now` and returns it.
class TokenBucket {
public:
    using Clock = std::chrono::steady_clock;

    TokenBucket(double requests_per_minute, int burst = 1);

    Clock::time_point reserve(Clock::time_point now);
    /// Blocks until admitted.
    void acquire();

private:
    std::chrono::nanoseconds interval_;
    int burst_;
    Clock::time_point next_free_{};
    bool primed_ = false;
    std::mutex mutex_;
};

struct LiveConfig {
    std::string endpoint;
    std::string api_key;
    std::string model;
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds timeout{60'000};
    double requests_per_minute = 60.0;

    /// Reads VISTRACE_ENDPOINT, VISTRACE_API_KEY and VISTRACE_MODEL.
    static LiveConfig from_env();
};

/// Chat-completions request body: role-tagged messages whose content is a
/// list of {"type":"text"} and {"type":"image_url"} parts, images as PNG data URLs.
[[nodiscard]] nlohmann::json chat_completions_body(const std::string& model,
                                                   const std::vector<ChatMessage>& messages,
                                                   const DecodeSettings& settings);

/// Extracts choices[0].message.content. Throws TransportError when absent.
[[nodiscard]] std::string parse_chat_completions_response(const std::string& body);

class LiveTransport final : public ChatTransport {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    LiveTransport(LiveConfig config, std::shared_ptr<HttpPoster> poster = nullptr, Sleeper sleeper = nullptr);

    ChatExchange complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) override;
    [[nodiscard]] std::string id() const override { return "live:" + config_.model; }

private:
    LiveConfig config_;
    std::shared_ptr<HttpPoster> poster_;
    Sleeper sleeper_;
    TokenBucket limiter_;
};

} // namespace vistrace::gateway
