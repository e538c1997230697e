// SPDX-License-Identifier: Apache-2.0
#pragma once

// Wire protocol shared with the vision sidecar.
//
//   POST /v1/tool    {"action": "segment"|"detect_referring"|"detect_dense",
//                     "image": "<png base64>", "query": "<text>", "request_id": "<uuid>"}
//     200 ->         {"boxes": [{"x0","y0","x1","y1","score","label"}], "elapsed_ms": n}
//                 or {"overlay": "<png base64>", "elapsed_ms": n}
//     4xx/5xx ->     {"error": {"kind": "...", "message": "..."}}
//   GET  /v1/health  {"ok": true, "version": "..."}
//
// "query" is present exactly for segment and detect_referring.

#include "vistrace/core/error.hpp"
#include "vistrace/core/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vistrace::tools {

enum class ToolAction { Segment, DetectReferring, DetectDense };

[[nodiscard]] std::string_view to_string(ToolAction action) noexcept;
[[nodiscard]] std::optional<ToolAction> parse_tool_action(std::string_view text) noexcept;

struct ToolRequest {
    ToolAction action = ToolAction::DetectReferring;
    std::string image_png_b64;
    std::optional<std::string> query;
    std::string request_id;

    bool operator==(const ToolRequest&) const = default;
};

struct OverlayImage {
    std::string image_png_b64;
    bool operator==(const OverlayImage&) const = default;
};

struct ToolResponse {
    std::variant<std::vector<Box>, OverlayImage> payload;
    std::int64_t elapsed_ms = 0;

    [[nodiscard]] bool has_boxes() const noexcept { return std::holds_alternative<std::vector<Box>>(payload); }
    [[nodiscard]] const std::vector<Box>& boxes() const { return std::get<std::vector<Box>>(payload); }
    [[nodiscard]] const OverlayImage& overlay() const { return std::get<OverlayImage>(payload); }

    bool operator==(const ToolResponse&) const = default;
};

struct Health {
    bool ok = false;
    std::string version;
};

class ToolError : public Error {
public:
    enum class Kind { Timeout, Connection, MalformedResponse, ToolReported };

    ToolError(Kind kind, std::string message);
    [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

[[nodiscard]] std::string_view to_string(ToolError::Kind kind) noexcept;

/// Builds a request with a fresh v4 request id.
[[nodiscard]] ToolRequest make_request(ToolAction action, const ImageData& image,
                                       std::optional<std::string> query = std::nullopt);

[[nodiscard]] std::string new_request_id();

/// Empty when the request satisfies the protocol, otherwise the reason.
[[nodiscard]] std::optional<std::string> request_violation(const ToolRequest& req);

[[nodiscard]] std::string encode_request(const ToolRequest& req);
/// Throws InvalidArgument on a malformed body or protocol violation.
[[nodiscard]] ToolRequest decode_request(std::string_view body);

[[nodiscard]] std::string encode_response(const ToolResponse& resp);
/// Validates the variant rule for `action` and every box. Error bodies become
/// ToolError(ToolReported); anything unparseable is MalformedResponse.
[[nodiscard]] ToolResponse decode_response(std::string_view body, ToolAction action);

[[nodiscard]] std::string encode_error(std::string_view kind, std::string_view message);

} // namespace vistrace::tools
