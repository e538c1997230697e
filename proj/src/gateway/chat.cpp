// SPDX-License-Identifier: Apache-2.0
#include "vistrace/gateway/chat.hpp"

#include "vistrace/core/encoding.hpp"
#include "vistrace/core/error.hpp"

#include <fmt/core.h>

namespace vistrace::gateway {

std::string_view to_string(Role role) noexcept {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

ChatMessage ChatMessage::system(std::string text) {
    return ChatMessage{Role::System, {TextPart{std::move(text)}}};
}

ChatMessage ChatMessage::user(std::vector<Part> parts) { return ChatMessage{Role::User, std::move(parts)}; }

std::size_t ChatMessage::image_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : parts) n += std::holds_alternative<ImagePart>(p) ? 1 : 0;
    return n;
}

void validate_request(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) {
    if (messages.empty()) throw InvalidArgument("chat request has no messages");
    if (settings.temperature < 0.0) throw InvalidArgument("temperature must be >= 0");
    if (settings.max_tokens <= 0) throw InvalidArgument("max_tokens must be positive");
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& m = messages[i];
        if (m.parts.empty()) throw InvalidArgument(fmt::format("message {} has no parts", i));
        if (m.role == Role::Assistant && m.image_count() > 0)
            throw InvalidArgument(fmt::format("assistant message {} carries an image", i));
        for (const auto& p : m.parts) {
            if (const auto* img = std::get_if<ImagePart>(&p); img && !img->image.valid())
                throw InvalidArgument(fmt::format("message {} carries an invalid image", i));
        }
    }
}

std::string request_fingerprint(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) {
    Sha256 h;
    h.update("vistrace-request/1\n");
    h.update(fmt::format("temperature={:.6f}\nmax_tokens={}\n", settings.temperature, settings.max_tokens));
    for (const auto& m : messages) {
        h.update(fmt::format("message role={} parts={}\n", to_string(m.role), m.parts.size()));
        for (const auto& p : m.parts) {
            if (const auto* t = std::get_if<TextPart>(&p)) {
                h.update(fmt::format("text bytes={}\n", t->text.size()));
                h.update(t->text);
            } else {
                const auto& img = std::get<ImagePart>(p).image;
                h.update(fmt::format("image width={} height={} channels={} bytes={}\n", img.width, img.height,
                                     img.channels, img.pixels.size()));
                h.update(img.pixels);
            }
            h.update("\n");
        }
    }
    return h.hex_digest();
}

std::string flatten_text(const ChatMessage& message) {
    std::string out;
    for (const auto& p : message.parts) {
        if (const auto* t = std::get_if<TextPart>(&p)) {
            if (!out.empty()) out.push_back('\n');
            out += t->text;
        } else {
            if (!out.empty()) out.push_back('\n');
            const auto& img = std::get<ImagePart>(p).image;
            out += fmt::format("<image {}x{}>", img.width, img.height);
        }
    }
    return out;
}

} // namespace vistrace::gateway
