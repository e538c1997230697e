// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/core/error.hpp"
#include "vistrace/gateway/chat.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

namespace vistrace::gateway {

class TransportError : public Error {
public:
    TransportError(std::string message, int attempts)
        : Error(std::move(message)), attempts_(attempts) {}
    [[nodiscard]] int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class FixtureMiss : public Error {
public:
    explicit FixtureMiss(std::string hash)
        : Error("no recorded response for request " + hash), hash_(std::move(hash)) {}
    [[nodiscard]] const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

/// Backend that turns a validated chat request into model text.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual ChatExchange complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) = 0;
    [[nodiscard]] virtual std::string id() const = 0;
};

/// Thread-safe front door for every model call in the pipeline.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<ChatTransport> transport);

    ChatExchange complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings = {});

    [[nodiscard]] std::size_t call_count() const noexcept { return calls_.load(); }
    [[nodiscard]] std::string transport_id() const { return transport_->id(); }

private:
    std::shared_ptr<ChatTransport> transport_;
    std::atomic<std::size_t> calls_{0};
};

/// Answers from `fixtures/<hash>.txt`. No rate limiting.
class ReplayTransport final : public ChatTransport {
public:
    explicit ReplayTransport(std::filesystem::path fixture_dir);
    ChatExchange complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) override;
    [[nodiscard]] std::string id() const override { return "replay"; }

private:
    std::filesystem::path dir_;
};

/// Forwards to another transport and stores each response as a fixture,
/// plus a `<hash>.request.txt` sidecar listing the text parts for review.
class RecordingTransport final : public ChatTransport {
public:
    RecordingTransport(std::shared_ptr<ChatTransport> inner, std::filesystem::path fixture_dir);
    ChatExchange complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) override;
    [[nodiscard]] std::string id() const override { return "record:" + inner_->id(); }

private:
    std::shared_ptr<ChatTransport> inner_;
    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

[[nodiscard]] std::filesystem::path fixture_path(const std::filesystem::path& dir, const std::string& hash);

/// Digest over the sorted (name, contents) pairs of every regular file in `dir`.
/// Empty string when the directory does not exist.
[[nodiscard]] std::string directory_fingerprint(const std::filesystem::path& dir);

} // namespace vistrace::gateway
