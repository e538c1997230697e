// SPDX-License-Identifier: Apache-2.0
#include "vistrace/gateway/gateway.hpp"

#include "vistrace/core/encoding.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/core.h>

namespace vistrace::gateway {

namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomically(const fs::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write fixture '{}'", tmp.string()));
        out << contents;
    }
    fs::rename(tmp, path);
}

} // namespace

Gateway::Gateway(std::shared_ptr<ChatTransport> transport) : transport_(std::move(transport)) {
    if (!transport_) throw ConfigError("gateway needs a transport");
}

ChatExchange Gateway::complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) {
    validate_request(messages, settings);
    calls_.fetch_add(1);
    return transport_->complete(messages, settings);
}

fs::path fixture_path(const fs::path& dir, const std::string& hash) { return dir / (hash + ".txt"); }

ReplayTransport::ReplayTransport(fs::path fixture_dir) : dir_(std::move(fixture_dir)) {
    if (dir_.empty()) throw ConfigError("replay transport requires a fixture directory");
}

ChatExchange ReplayTransport::complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) {
    ChatExchange ex{messages, settings, {}, id(), request_fingerprint(messages, settings)};
    const auto path = fixture_path(dir_, ex.fingerprint);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw FixtureMiss(ex.fingerprint);
    ex.response_text = read_all(path);
    return ex;
}

RecordingTransport::RecordingTransport(std::shared_ptr<ChatTransport> inner, fs::path fixture_dir)
    : inner_(std::move(inner)), dir_(std::move(fixture_dir)) {
    if (!inner_) throw ConfigError("record transport needs an upstream transport");
    if (dir_.empty()) throw ConfigError("record transport requires a fixture directory");
}

ChatExchange RecordingTransport::complete(const std::vector<ChatMessage>& messages, const DecodeSettings& settings) {
    auto ex = inner_->complete(messages, settings);
    ex.fingerprint = request_fingerprint(messages, settings);
    ex.transport_id = id();

    std::ostringstream meta;
    meta << fmt::format("temperature={:.6f} max_tokens={}\n", settings.temperature, settings.max_tokens);
    for (const auto& m : messages) meta << "--- " << to_string(m.role) << "\n" << flatten_text(m) << "\n";

    std::lock_guard lock(write_mutex_);
    fs::create_directories(dir_);
    write_atomically(fixture_path(dir_, ex.fingerprint), ex.response_text);
    write_atomically(dir_ / (ex.fingerprint + ".request.txt"), meta.str());
    return ex;
}

std::string directory_fingerprint(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return {};
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    Sha256 h;
    for (const auto& f : files) {
        const auto rel = fs::relative(f, dir).generic_string();
        const auto body = read_all(f);
        h.update(fmt::format("{} {}\n", rel, body.size()));
        h.update(body);
    }
    return h.hex_digest();
}

} // namespace vistrace::gateway
