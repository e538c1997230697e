// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/core/types.hpp"

#include <chrono>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vistrace::gateway {

enum class Role { System, User, Assistant };

[[nodiscard]] std::string_view to_string(Role role) noexcept;

struct TextPart {
    std::string text;
    bool operator==(const TextPart&) const = default;
};

struct ImagePart {
    ImageData image;
    bool operator==(const ImagePart&) const = default;
};

using Part = std::variant<TextPart, ImagePart>;

struct ChatMessage {
    Role role = Role::User;
    std::vector<Part> parts;

    static ChatMessage system(std::string text);
    static ChatMessage user(std::vector<Part> parts);

    [[nodiscard]] std::size_t image_count() const noexcept;
    bool operator==(const ChatMessage&) const = default;
};

struct DecodeSettings {
    double temperature = 0.0;
    int max_tokens = 500;

    bool operator==(const DecodeSettings&) const = default;
};

struct ChatExchange {
    std::vector<ChatMessage> request;
    DecodeSettings settings;
    std::string response_text;
    std::string transport_id;
    std::string fingerprint;
    std::chrono::milliseconds latency{0};
    int attempts = 1;
};

/// Throws InvalidArgument when a message list breaks the chat invariants:
/// non-empty list, every message has a part, no images from the assistant,
/// every image valid, settings in range.
void validate_request(const std::vector<ChatMessage>& messages, const DecodeSettings& settings);

/// SHA-256 (hex) over a canonical byte stream of the request:
///
///     "vistrace-request/1\n"
///     "temperature=<%.6f>\n" "max_tokens=<int>\n"
///     per message:  "message role=<system|user|assistant> parts=<n>\n"
///     per text:     "text bytes=<len>\n" <utf8 bytes> "\n"
///     per image:    "image width=<w> height=<h> channels=<c> bytes=<len>\n" <raw pixels> "\n"
///
/// Images contribute decoded pixels, so the source encoding never matters.
[[nodiscard]] std::string request_fingerprint(const std::vector<ChatMessage>& messages,
                                              const DecodeSettings& settings);

/// Text parts only, joined by newlines. Handy for logs and fixture metadata.
[[nodiscard]] std::string flatten_text(const ChatMessage& message);

} // namespace vistrace::gateway
