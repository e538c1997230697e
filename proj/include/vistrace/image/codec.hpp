// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vistrace::image {

/// Lossless PNG; output bytes are a pure function of the raster.
[[nodiscard]] std::vector<std::uint8_t> encode_png(const ImageData& img);

/// Decodes PNG or JPEG (sniffed from magic bytes). PNGs with alpha keep 4
/// channels, everything else becomes RGB. Throws InvalidArgument.
[[nodiscard]] ImageData decode(std::span<const std::uint8_t> bytes);

[[nodiscard]] std::string to_png_base64(const ImageData& img);
[[nodiscard]] ImageData from_base64(std::string_view b64);

[[nodiscard]] ImageData read_file(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageData& img);

} // namespace vistrace::image
