// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/tools/protocol.hpp"

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

namespace vistrace::tools {

/// Concurrency-safe tool endpoint. Counts every call() for run statistics.
class ToolClient {
public:
    virtual ~ToolClient() = default;

    ToolResponse call(const ToolRequest& req);
    Health health() { return do_health(); }

    [[nodiscard]] std::size_t call_count() const noexcept { return calls_.load(); }
    [[nodiscard]] virtual std::string describe() const = 0;

protected:
    virtual ToolResponse do_call(const ToolRequest& req) = 0;
    virtual Health do_health() = 0;

private:
    std::atomic<std::size_t> calls_{0};
};

namespace stub {

inline constexpr std::string_view kVersion = "stub-1";
/// Centred half-box returned for every referring query.
[[nodiscard]] Box referring_box(std::string label);
inline constexpr std::array<std::uint8_t, 3> kWashColor{30, 144, 255};

/// The two fixed dense-detection boxes.
[[nodiscard]] std::vector<Box> dense_boxes();

/// Alpha wash over the centred half-box: each RGB channel becomes
/// (src + wash + 1) / 2 inside [round(w/4), round(3w/4)) x [round(h/4), round(3h/4)).
[[nodiscard]] ImageData wash(const ImageData& img);

/// Deterministic stub answer for a protocol-valid request.
[[nodiscard]] ToolResponse respond(const ToolRequest& req);

struct HttpReply {
    int status = 200;
    std::string body;
};

/// Server half of the protocol over the stub backend: raw POST body in,
/// status + body out. Protocol violations answer 400 malformed_request.
[[nodiscard]] HttpReply handle_tool_post(std::string_view body);
[[nodiscard]] std::string health_body();

} // namespace stub

class StubToolClient final : public ToolClient {
public:
    [[nodiscard]] std::string describe() const override { return std::string(stub::kVersion); }

protected:
    ToolResponse do_call(const ToolRequest& req) override;
    Health do_health() override { return Health{true, std::string(stub::kVersion)}; }
};

struct HttpToolConfig {
    std::string base_url; // e.g. http://127.0.0.1:8765
    std::chrono::milliseconds timeout{30'000};
    int max_in_flight = 4;
};

class HttpToolClient final : public ToolClient {
public:
    explicit HttpToolClient(HttpToolConfig config);
    [[nodiscard]] std::string describe() const override { return "http:" + config_.base_url; }

protected:
    ToolResponse do_call(const ToolRequest& req) override;
    Health do_health() override;

private:
    HttpToolConfig config_;
    std::counting_semaphore<64> in_flight_;
};

/// Stub when `spec` is empty or "stub", otherwise an HTTP client for the URL.
[[nodiscard]] std::shared_ptr<ToolClient> make_tool_client(const std::string& spec,
                                                           std::chrono::milliseconds timeout = std::chrono::seconds(30),
                                                           int max_in_flight = 4);

} // namespace vistrace::tools
