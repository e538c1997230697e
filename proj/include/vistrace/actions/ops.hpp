// SPDX-License-Identifier: Apache-2.0
#pragma once

// Native pixel operations that produce visual rationales. All are pure:
// identical inputs give identical buffers. Alpha, when present, is preserved.

#include "vistrace/core/error.hpp"
#include "vistrace/core/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vistrace::actions {

using Rgb = std::array<std::uint8_t, 3>;

class DegenerateBox : public Error {
public:
    using Error::Error;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    [[nodiscard]] int width() const noexcept { return x1 - x0; }
    [[nodiscard]] int height() const noexcept { return y1 - y0; }
    [[nodiscard]] bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
    [[nodiscard]] bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    bool operator==(const PixelRect&) const = default;
};

/// Integer luma, 0.299R + 0.587G + 0.114B rounded half up.
[[nodiscard]] constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

[[nodiscard]] ImageData color_transform(const ImageData& img);

inline constexpr int kDefaultEdgeThreshold = 96;

/// Sobel magnitude on the luma plane (borders replicated), scaled so the
/// strongest possible response maps to 255, then binarized: >= threshold -> 255.
[[nodiscard]] ImageData edge_detect(const ImageData& img, int threshold = kDefaultEdgeThreshold);

/// round(box x dims), then grown by `margin` x crop size per side and clamped.
/// Throws DegenerateBox when the rounded box is empty.
[[nodiscard]] PixelRect crop_rect(const Box& box, int width, int height, double margin);

inline constexpr double kDefaultZoomMargin = 0.05;
inline constexpr int kDefaultZoomMaxSide = 2048;

/// Crops crop_rect() and upscales it nearest-neighbour by `upscale`, reducing
/// the factor when needed so neither output side exceeds `max_side`.
[[nodiscard]] ImageData zoom_crop(const ImageData& img, const Box& box, double upscale,
                                  double margin = kDefaultZoomMargin, int max_side = kDefaultZoomMaxSide);

struct RulerLayout {
    PixelRect horizontal_axis;
    PixelRect vertical_axis;
    /// Q1 top-left, Q2 top-right, Q3 bottom-right, Q4 bottom-left. Empty when
    /// the image is too small to label.
    std::vector<PixelRect> label_boxes;
    int label_scale = 1;
};

[[nodiscard]] RulerLayout ruler_layout(int width, int height, int stroke);

/// Axes through the image centre plus quadrant labels. Black on bright
/// images (mean luma >= 128), white otherwise; labels sit on a patch of the
/// opposite colour.
[[nodiscard]] ImageData spatial_ruler(const ImageData& img, int stroke = 2);

[[nodiscard]] std::vector<Rgb> default_palette();

/// Box pixel rectangle: rounded normalized coordinates, at least one pixel.
[[nodiscard]] PixelRect box_pixels(const Box& box, int width, int height) noexcept;

/// Where a box's label patch goes: above the box, or inside its top-left
/// corner when above would leave the image. Empty rect for empty labels.
[[nodiscard]] PixelRect label_rect(const Box& box, int width, int height, int stroke);

/// Outlines each box (`stroke` px, drawn inward) in palette colour i mod n and
/// renders its label on a patch of the same colour.
[[nodiscard]] ImageData draw_boxes(const ImageData& img, std::span<const Box> boxes, int stroke = 3,
                                   std::span<const Rgb> palette = {});

} // namespace vistrace::actions
