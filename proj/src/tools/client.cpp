// SPDX-License-Identifier: Apache-2.0
#include "vistrace/tools/client.hpp"

#include "vistrace/image/codec.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace vistrace::tools {

ToolResponse ToolClient::call(const ToolRequest& req) {
    if (auto why = request_violation(req)) throw InvalidArgument(*why);
    calls_.fetch_add(1);
    return do_call(req);
}

namespace stub {

Box referring_box(std::string label) { return Box{0.25, 0.25, 0.75, 0.75, 1.0, std::move(label)}; }

std::vector<Box> dense_boxes() {
    return {Box{0.05, 0.05, 0.45, 0.45, 0.9, "object"}, Box{0.55, 0.55, 0.95, 0.95, 0.8, "object"}};
}

ImageData wash(const ImageData& img) {
    ImageData out = img;
    const auto x0 = static_cast<int>(std::lround(img.width * 0.25));
    const auto x1 = static_cast<int>(std::lround(img.width * 0.75));
    const auto y0 = static_cast<int>(std::lround(img.height * 0.25));
    const auto y1 = static_cast<int>(std::lround(img.height * 0.75));
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            auto* px = out.at(x, y);
            for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>((px[c] + kWashColor[c] + 1) / 2);
        }
    }
    return out;
}

ToolResponse respond(const ToolRequest& req) {
    ToolResponse resp;
    switch (req.action) {
    case ToolAction::DetectReferring: {
        resp.payload = std::vector<Box>{referring_box(req.query.value_or(""))};
        break;
    }
    case ToolAction::DetectDense: resp.payload = dense_boxes(); break;
    case ToolAction::Segment:
        resp.payload = OverlayImage{image::to_png_base64(wash(image::from_base64(req.image_png_b64)))};
        break;
    }
    return resp;
}

HttpReply handle_tool_post(std::string_view body) {
    ToolRequest req;
    try {
        req = decode_request(body);
    } catch (const Error& e) {
        return {400, encode_error("malformed_request", e.what())};
    }
    try {
        return {200, encode_response(respond(req))};
    } catch (const Error& e) {
        return {400, encode_error("malformed_request", e.what())};
    }
}

std::string health_body() { return nlohmann::json{{"ok", true}, {"version", kVersion}}.dump(); }

} // namespace stub

ToolResponse StubToolClient::do_call(const ToolRequest& req) {
    try {
        return stub::respond(req);
    } catch (const Error& e) {
        throw ToolError(ToolError::Kind::ToolReported, e.what());
    }
}

HttpToolClient::HttpToolClient(HttpToolConfig config)
    : config_(std::move(config)), in_flight_(std::clamp(config_.max_in_flight, 1, 64)) {
    if (config_.base_url.empty()) throw ConfigError("tool sidecar URL is empty");
}

namespace {

void apply_timeouts(httplib::Client& client, std::chrono::milliseconds timeout) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
}

ToolError transport_failure(httplib::Error err) {
    const bool timeout = err == httplib::Error::Read || err == httplib::Error::Write ||
                         err == httplib::Error::ConnectionTimeout;
    return ToolError(timeout ? ToolError::Kind::Timeout : ToolError::Kind::Connection, httplib::to_string(err));
}

} // namespace

ToolResponse HttpToolClient::do_call(const ToolRequest& req) {
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<64>& sem;
        ~Release() { sem.release(); }
    } release{in_flight_};

    httplib::Client client(config_.base_url);
    apply_timeouts(client, config_.timeout);
    auto res = client.Post("/v1/tool", encode_request(req), "application/json");
    if (!res) throw transport_failure(res.error());
    return decode_response(res->body, req.action);
}

Health HttpToolClient::do_health() {
    httplib::Client client(config_.base_url);
    apply_timeouts(client, config_.timeout);
    auto res = client.Get("/v1/health");
    if (!res) throw ToolError(ToolError::Kind::Connection, httplib::to_string(res.error()));
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (res->status != 200 || j.is_discarded() || !j.is_object())
        throw ToolError(ToolError::Kind::MalformedResponse, fmt::format("health returned HTTP {}", res->status));
    return Health{j.value("ok", false), j.value("version", std::string())};
}

std::shared_ptr<ToolClient> make_tool_client(const std::string& spec, std::chrono::milliseconds timeout,
                                             int max_in_flight) {
    if (spec.empty() || spec == "stub") return std::make_shared<StubToolClient>();
    return std::make_shared<HttpToolClient>(HttpToolConfig{spec, timeout, max_in_flight});
}

} // namespace vistrace::tools
