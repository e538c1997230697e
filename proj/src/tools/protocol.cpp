// SPDX-License-Identifier: Apache-2.0
#include "vistrace/tools/protocol.hpp"

#include "vistrace/core/json.hpp"
#include "vistrace/image/codec.hpp"

#include <random>

#include <fmt/core.h>

namespace vistrace::tools {

using nlohmann::json;

std::string_view to_string(ToolAction action) noexcept {
    switch (action) {
    case ToolAction::Segment: return "segment";
    case ToolAction::DetectReferring: return "detect_referring";
    case ToolAction::DetectDense: return "detect_dense";
    }
    return "detect_referring";
}

std::optional<ToolAction> parse_tool_action(std::string_view text) noexcept {
    if (text == "segment") return ToolAction::Segment;
    if (text == "detect_referring") return ToolAction::DetectReferring;
    if (text == "detect_dense") return ToolAction::DetectDense;
    return std::nullopt;
}

ToolError::ToolError(Kind kind, std::string message)
    : Error(fmt::format("tool error ({}): {}", to_string(kind), message)), kind_(kind) {}

std::string_view to_string(ToolError::Kind kind) noexcept {
    switch (kind) {
    case ToolError::Kind::Timeout: return "timeout";
    case ToolError::Kind::Connection: return "connection";
    case ToolError::Kind::MalformedResponse: return "malformed_response";
    case ToolError::Kind::ToolReported: return "tool_reported";
    }
    return "tool_reported";
}

std::string new_request_id() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_int_distribution<std::uint64_t> dist;
    std::uint64_t hi = dist(rng);
    std::uint64_t lo = dist(rng);
    hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL; // version 4
    lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL; // RFC 4122 variant
    return fmt::format("{:08x}-{:04x}-{:04x}-{:04x}-{:012x}", hi >> 32, (hi >> 16) & 0xFFFF, hi & 0xFFFF,
                       lo >> 48, lo & 0xFFFFFFFFFFFFULL);
}

ToolRequest make_request(ToolAction action, const ImageData& image, std::optional<std::string> query) {
    return ToolRequest{action, image::to_png_base64(image), std::move(query), new_request_id()};
}

std::optional<std::string> request_violation(const ToolRequest& req) {
    const bool wants_query = req.action != ToolAction::DetectDense;
    if (wants_query && (!req.query || req.query->empty()))
        return fmt::format("{} requires a non-empty query", to_string(req.action));
    if (!wants_query && req.query) return std::string("detect_dense must not carry a query");
    if (req.image_png_b64.empty()) return std::string("image is empty");
    if (req.request_id.empty()) return std::string("request_id is empty");
    return std::nullopt;
}

std::string encode_request(const ToolRequest& req) {
    json j{{"action", to_string(req.action)}, {"image", req.image_png_b64}, {"request_id", req.request_id}};
    if (req.query) j["query"] = *req.query;
    return j.dump();
}

ToolRequest decode_request(std::string_view body) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InvalidArgument("request body is not a JSON object");
    ToolRequest req;
    try {
        const auto action = parse_tool_action(j.at("action").get<std::string>());
        if (!action) throw InvalidArgument(fmt::format("unknown action '{}'", j.at("action").get<std::string>()));
        req.action = *action;
        req.image_png_b64 = j.at("image").get<std::string>();
        req.request_id = j.at("request_id").get<std::string>();
        if (auto it = j.find("query"); it != j.end() && !it->is_null()) req.query = it->get<std::string>();
    } catch (const json::exception& e) {
        throw InvalidArgument(fmt::format("malformed request: {}", e.what()));
    }
    if (auto why = request_violation(req)) throw InvalidArgument(*why);
    return req;
}

std::string encode_response(const ToolResponse& resp) {
    json j{{"elapsed_ms", resp.elapsed_ms}};
    if (resp.has_boxes())
        j["boxes"] = resp.boxes();
    else
        j["overlay"] = resp.overlay().image_png_b64;
    return j.dump();
}

ToolResponse decode_response(std::string_view body, ToolAction action) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ToolError(ToolError::Kind::MalformedResponse, "response body is not a JSON object");

    if (auto err = j.find("error"); err != j.end()) {
        const auto kind = err->is_object() ? err->value("kind", std::string("unknown")) : "unknown";
        const auto msg = err->is_object() ? err->value("message", std::string()) : err->dump();
        throw ToolError(ToolError::Kind::ToolReported, fmt::format("{}: {}", kind, msg));
    }

    ToolResponse resp;
    try {
        resp.elapsed_ms = j.value("elapsed_ms", std::int64_t{0});
        const bool has_boxes = j.contains("boxes");
        const bool has_overlay = j.contains("overlay");
        if (has_boxes == has_overlay)
            throw ToolError(ToolError::Kind::MalformedResponse, "response must carry exactly one of boxes/overlay");

        if (action == ToolAction::Segment) {
            if (!has_overlay)
                throw ToolError(ToolError::Kind::MalformedResponse, "segment must return an overlay image");
            resp.payload = OverlayImage{j.at("overlay").get<std::string>()};
        } else {
            if (!has_boxes)
                throw ToolError(ToolError::Kind::MalformedResponse,
                                fmt::format("{} must return boxes", to_string(action)));
            auto boxes = j.at("boxes").get<std::vector<Box>>();
            for (const auto& b : boxes)
                if (!b.valid())
                    throw ToolError(ToolError::Kind::MalformedResponse,
                                    fmt::format("box ({}, {}, {}, {}) violates box invariants", b.x0, b.y0, b.x1,
                                                b.y1));
            resp.payload = std::move(boxes);
        }
    } catch (const json::exception& e) {
        throw ToolError(ToolError::Kind::MalformedResponse, e.what());
    }
    return resp;
}

std::string encode_error(std::string_view kind, std::string_view message) {
    return json{{"error", {{"kind", kind}, {"message", message}}}}.dump();
}

} // namespace vistrace::tools
