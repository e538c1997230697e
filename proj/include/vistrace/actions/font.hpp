// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/core/types.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace vistrace::actions {

// 5x7 bitmap glyphs, one column of spacing. Lower case renders as upper case;
// characters without a glyph render as '?'.
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

struct TextExtent {
    int width = 0;
    int height = 0;
};

[[nodiscard]] TextExtent measure_text(std::string_view text, int scale) noexcept;

/// Draws glyph pixels only (no background), clipped to the image.
void draw_text(ImageData& img, int x, int y, std::string_view text, std::array<std::uint8_t, 3> color, int scale);

} // namespace vistrace::actions
