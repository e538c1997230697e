// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vistrace {

[[nodiscard]] std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws InvalidArgument on characters outside the standard alphabet or bad padding.
[[nodiscard]] std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Incremental SHA-256, hex digest.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> bytes);
    Sha256& update(std::string_view text);
    [[nodiscard]] std::string hex_digest();

private:
    void* ctx_;
};

[[nodiscard]] std::string sha256_hex(std::string_view text);

} // namespace vistrace
